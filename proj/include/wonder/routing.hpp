#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wonder/mecd_model.hpp"

namespace wonder {

/// Adjacency of the element graph. Explicit links are bidirectional; inside
/// an EDC every element is attached to each fabric router of that EDC and
/// every CU is attached to each UPF (N3), all at the intra-EDC hop delay.
class Graph {
 public:
  struct Edge {
    int to = -1;
    Micros delay{0};
    /// Index into Topology::links, or -1 for an implicit intra-EDC hop.
    int link = -1;
  };

  using LinkFilter = std::function<bool(const Link&)>;

  Graph(const Topology& topology, const LinkFilter& include_link);

  int size() const { return static_cast<int>(ids_.size()); }
  std::optional<int> index(std::string_view element_id) const;
  const std::string& id(int node) const { return ids_[node]; }
  const std::vector<Edge>& edges(int node) const { return adjacency_[node]; }

 private:
  std::vector<std::string> ids_;
  std::vector<std::vector<Edge>> adjacency_;
};

/// Links that carry routing state right now: admin_up, plus failed protected
/// links whose restoration has not completed (forwarding has not reconverged).
Graph forwarding_graph(const Topology& topology);
/// Links that are administratively up.
Graph admin_up_graph(const Topology& topology);

struct Route {
  std::vector<std::string> nodes;
  /// links[i] joins nodes[i] and nodes[i + 1]; -1 marks an intra-EDC hop.
  std::vector<int> links;
  Micros delay{0};
};

/// Distance (delay, then hop count) from every node to `target`.
struct Distance {
  Micros delay{0};
  int hops = 0;
  auto operator<=>(const Distance&) const = default;
};
std::vector<std::optional<Distance>> distances_to(const Graph& graph, int target);

/// Hop-by-hop minimum-delay route as a forwarding plane would follow it:
/// at each node the next hop minimises (delay, hops) to the target, ties going
/// to the lowest next element_id, then the lowest-delay parallel link.
std::optional<Route> shortest_route(const Graph& graph, std::string_view from,
                                    std::string_view to);

}  // namespace wonder
