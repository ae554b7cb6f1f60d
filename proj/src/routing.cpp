#include "wonder/routing.hpp"

#include <algorithm>
#include <queue>

namespace wonder {

Graph::Graph(const Topology& topology, const LinkFilter& include_link) {
  const auto elements = topology.elements();
  for (const auto* e : elements) ids_.push_back(e->element_id);
  adjacency_.resize(ids_.size());

  auto add = [this](int a, int b, Micros delay, int link) {
    adjacency_[a].push_back({b, delay, link});
    adjacency_[b].push_back({a, delay, link});
  };

  for (int i = 0; i < size(); ++i) {
    for (int j = i + 1; j < size(); ++j) {
      const auto& a = *elements[i];
      const auto& b = *elements[j];
      if (a.edc_id != b.edc_id) continue;
      const bool router = a.element_type == ElementType::FabricRouter ||
                          b.element_type == ElementType::FabricRouter;
      const bool n3 = (a.element_type == ElementType::CU && b.element_type == ElementType::UPF) ||
                      (a.element_type == ElementType::UPF && b.element_type == ElementType::CU);
      if (router || n3) add(i, j, topology.intra_edc_delay, -1);
    }
  }

  for (std::size_t l = 0; l < topology.links.size(); ++l) {
    const auto& link = topology.links[l];
    if (!include_link(link)) continue;
    auto a = index(link.from);
    auto b = index(link.to);
    if (a && b) add(*a, *b, link.delay, static_cast<int>(l));
  }
}

std::optional<int> Graph::index(std::string_view element_id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), element_id);
  if (it == ids_.end() || *it != element_id) return std::nullopt;
  return static_cast<int>(it - ids_.begin());
}

Graph forwarding_graph(const Topology& topology) {
  return Graph(topology, [](const Link& l) { return l.admin_up || l.restoring; });
}

Graph admin_up_graph(const Topology& topology) {
  return Graph(topology, [](const Link& l) { return l.admin_up; });
}

std::vector<std::optional<Distance>> distances_to(const Graph& graph, int target) {
  std::vector<std::optional<Distance>> dist(graph.size());
  using Item = std::pair<Distance, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[target] = Distance{};
  queue.push({Distance{}, target});
  while (!queue.empty()) {
    auto [d, u] = queue.top();
    queue.pop();
    if (d != *dist[u]) continue;
    for (const auto& e : graph.edges(u)) {
      Distance nd{d.delay + e.delay, d.hops + 1};
      if (!dist[e.to] || nd < *dist[e.to]) {
        dist[e.to] = nd;
        queue.push({nd, e.to});
      }
    }
  }
  return dist;
}

std::optional<Route> shortest_route(const Graph& graph, std::string_view from,
                                    std::string_view to) {
  auto src = graph.index(from);
  auto dst = graph.index(to);
  if (!src || !dst) return std::nullopt;
  const auto dist = distances_to(graph, *dst);
  if (!dist[*src]) return std::nullopt;

  Route route;
  route.nodes.push_back(graph.id(*src));
  int u = *src;
  while (u != *dst) {
    const Graph::Edge* chosen = nullptr;
    for (const auto& e : graph.edges(u)) {
      if (!dist[e.to]) continue;
      Distance via{e.delay + dist[e.to]->delay, dist[e.to]->hops + 1};
      if (via != *dist[u]) continue;
      if (!chosen || graph.id(e.to) < graph.id(chosen->to) ||
          (e.to == chosen->to &&
           (e.delay < chosen->delay || (e.delay == chosen->delay && e.link < chosen->link))))
        chosen = &e;
    }
    route.links.push_back(chosen->link);
    route.delay += chosen->delay;
    u = chosen->to;
    route.nodes.push_back(graph.id(u));
  }
  return route;
}

}  // namespace wonder
