#include "wonder/oer_controller.hpp"

#include <algorithm>
#include <queue>

#include <nlohmann/json.hpp>

#include "wonder/error.hpp"

namespace wonder {

namespace {

constexpr double kSurvivalSlack = 1e-12;

// One partial path in the multi-criteria search.
struct Label {
  Micros delay{0};
  Micros backup{0};
  double survival = 1.0;
  int node = -1;
  int parent = -1;
  int link = -1;
};

bool weakly_dominates(const Label& a, const Label& b) {
  return a.delay <= b.delay && a.backup <= b.backup && a.survival >= b.survival;
}

struct LegConstraints {
  double min_capacity = 0.0;
  bool require_protection = false;
};

Graph class_graph(const Topology& topology, const LegConstraints& c) {
  return Graph(topology, [&](const Link& l) {
    if (!l.admin_up) return false;
    if (l.capacity_gbps < c.min_capacity) return false;
    if (c.require_protection && topology.is_inter_edc(l))
      return l.is_protected && topology.backup_for(l.link_id) != nullptr;
    return true;
  });
}

Route to_route(const Graph& graph, const std::vector<Label>& labels, int leaf) {
  Route route;
  for (int l = leaf; l >= 0; l = labels[l].parent) {
    route.nodes.push_back(graph.id(labels[l].node));
    if (labels[l].parent >= 0) route.links.push_back(labels[l].link);
  }
  std::reverse(route.nodes.begin(), route.nodes.end());
  std::reverse(route.links.begin(), route.links.end());
  route.delay = labels[leaf].delay;
  return route;
}

// Hops the forwarding plane itself takes between adjacent elements, as
// (from, to, link). Only walks made of these hops are expressible with node SIDs.
using HopSet = std::set<std::tuple<int, int, int>>;

HopSet expressible_hops(const Topology& topology) {
  const Graph fwd = forwarding_graph(topology);
  HopSet out;
  for (int u = 0; u < fwd.size(); ++u) {
    std::set<int> neighbours;
    for (const auto& e : fwd.edges(u)) neighbours.insert(e.to);
    for (int v : neighbours) {
      auto route = shortest_route(fwd, fwd.id(u), fwd.id(v));
      if (route && route->links.size() == 1) out.emplace(u, v, route->links.front());
    }
  }
  return out;
}

struct LegPath {
  Route route;
  Micros backup{0};
  double survival = 1.0;
};

// Pareto frontier of simple src -> dst paths under (delay, backup delay,
// survival). Labels are settled in lexicographic order, so a settled label is
// never dominated by a later one.
std::vector<LegPath> pareto_paths(const Topology& topology, const Graph& graph,
                                  const HopSet& hops, std::string_view src, std::string_view dst) {
  auto s = graph.index(src);
  auto t = graph.index(dst);
  if (!s || !t) return {};

  auto backup_delay = [&](int link, Micros primary) {
    if (link < 0) return primary;
    const auto& l = topology.links[link];
    if (!l.is_protected) return primary;
    const Link* b = topology.backup_for(l.link_id);
    return b ? b->delay : primary;
  };

  std::vector<Label> labels{{Micros{0}, Micros{0}, 1.0, *s, -1, -1}};
  std::vector<std::vector<int>> settled(graph.size());
  auto key = [&](int l) {
    return std::make_tuple(labels[l].delay, labels[l].backup, -labels[l].survival, l);
  };
  auto cmp = [&](int a, int b) { return key(a) > key(b); };
  std::priority_queue<int, std::vector<int>, decltype(cmp)> queue(cmp);
  queue.push(0);

  auto dominated = [&](const Label& cand) {
    for (int p : settled[cand.node])
      if (weakly_dominates(labels[p], cand)) return true;
    return false;
  };
  auto on_path = [&](int leaf, int node) {
    for (int l = leaf; l >= 0; l = labels[l].parent)
      if (labels[l].node == node) return true;
    return false;
  };

  while (!queue.empty()) {
    const int cur = queue.top();
    queue.pop();
    if (dominated(labels[cur])) continue;
    settled[labels[cur].node].push_back(cur);
    if (labels[cur].node == *t) continue;
    for (const auto& e : graph.edges(labels[cur].node)) {
      if (on_path(cur, e.to)) continue;
      if (!hops.count({labels[cur].node, e.to, e.link})) continue;
      double surv = labels[cur].survival;
      if (e.link >= 0) surv *= 1.0 - topology.links[e.link].error_rate;
      Label next{labels[cur].delay + e.delay, labels[cur].backup + backup_delay(e.link, e.delay),
                 surv, e.to, cur, e.link};
      if (dominated(next)) continue;
      labels.push_back(next);
      queue.push(static_cast<int>(labels.size()) - 1);
    }
  }

  std::vector<LegPath> out;
  for (int leaf : settled[*t])
    out.push_back({to_route(graph, labels, leaf), labels[leaf].backup, labels[leaf].survival});
  return out;
}

Route substitute_backups(const Topology& topology, Route route) {
  route.delay = Micros{0};
  for (auto& link : route.links) {
    if (link >= 0 && topology.links[link].is_protected) {
      if (const Link* b = topology.backup_for(topology.links[link].link_id))
        link = static_cast<int>(b - topology.links.data());
    }
    route.delay += link >= 0 ? topology.links[link].delay : topology.intra_edc_delay;
  }
  return route;
}

Route reversed(Route r) {
  std::reverse(r.nodes.begin(), r.nodes.end());
  std::reverse(r.links.begin(), r.links.end());
  return r;
}

bool stack_less(const StackSet& a, const StackSet& b) {
  SegmentList ea = a.ul_cu, eb = b.ul_cu;
  ea.insert(ea.end(), a.ul_upf.begin(), a.ul_upf.end());
  eb.insert(eb.end(), b.ul_upf.begin(), b.ul_upf.end());
  return ea < eb;
}

LegConstraints constraints_for(const TrafficClass& tc) {
  return {tc.peak_rate_gbps, tc.is_protected()};
}

// Builds the record for one (CU, UPF, EC) from the two leg frontiers. With
// `bound` unset, only reachability matters.
std::optional<PathRecord> combine(const ControllerInputs& in, const TrafficClass& tc,
                                  const std::vector<LegPath>& n3, const std::vector<LegPath>& n6,
                                  bool enforce, std::string* reason) {
  struct Pair {
    const LegPath* a;
    const LegPath* b;
    Micros rtt;
    Micros backup_rtt;
  };
  std::vector<Pair> feasible;
  bool any_latency = false;
  for (const auto& a : n3) {
    for (const auto& b : n6) {
      const Micros rtt = in.air_rtt + 2 * (a.route.delay + b.route.delay);
      const Micros backup_rtt = in.air_rtt + 2 * (a.backup + b.backup);
      if (enforce) {
        if (rtt > tc.latency_bound_rtt) continue;
        any_latency = true;
        if (tc.is_protected() && backup_rtt > tc.latency_bound_rtt) continue;
        if (a.survival * b.survival < 1.0 - tc.max_error_rate - kSurvivalSlack) continue;
      }
      feasible.push_back({&a, &b, rtt, backup_rtt});
    }
  }
  if (feasible.empty()) {
    if (reason) {
      if (n3.empty() || n6.empty())
        *reason = "no path satisfies the link constraints";
      else
        *reason = any_latency ? "no path meets protection or error constraints"
                              : "latency bound exceeded";
    }
    return std::nullopt;
  }
  std::stable_sort(feasible.begin(), feasible.end(),
                   [](const Pair& x, const Pair& y) { return x.rtt < y.rtt; });

  const auto& topo = *in.topology;
  std::optional<PathRecord> best;
  for (std::size_t i = 0; i < feasible.size(); ++i) {
    if (best && feasible[i].rtt > best->rtt) break;
    const auto& p = feasible[i];
    auto ul_cu = encode_segments(topo, *in.registry, p.a->route);
    auto ul_upf = encode_segments(topo, *in.registry, p.b->route);
    auto dl_ec = encode_segments(topo, *in.registry, reversed(p.b->route));
    auto dl_upf = encode_segments(topo, *in.registry, reversed(p.a->route));
    if (!ul_cu || !ul_upf || !dl_ec || !dl_upf) continue;

    PathRecord rec;
    rec.class_id = tc.class_id;
    rec.src_element = p.a->route.nodes.front();
    rec.upf_element = p.a->route.nodes.back();
    rec.ec_element = p.b->route.nodes.back();
    rec.stacks = {*ul_cu, *ul_upf, *dl_ec, *dl_upf};
    rec.rtt = p.rtt;
    rec.backup_rtt = p.backup_rtt;
    rec.ul_walk = p.a->route.nodes;
    rec.ul_walk.insert(rec.ul_walk.end(), p.b->route.nodes.begin() + 1, p.b->route.nodes.end());
    bool all_protected = true;
    for (const Route* r : {&p.a->route, &p.b->route})
      for (int l : r->links)
        if (l >= 0 && topo.is_inter_edc(topo.links[l]) &&
            !(topo.links[l].is_protected && topo.backup_for(topo.links[l].link_id)))
          all_protected = false;
    rec.is_protected = all_protected;
    if (!best || better_record(rec, *best)) best = std::move(rec);
  }
  if (!best && reason) *reason = "path not expressible as a segment list";
  return best;
}

const std::string& provider_of(const Topology& t, std::string_view element) {
  return t.element(element).provider_id;
}

}  // namespace

SegmentList PathRecord::end_to_end(const SidRegistry& registry) const {
  SegmentList out;
  if (const auto* cu = registry.record(src_element)) out.push_back(cu->sid);
  out.insert(out.end(), stacks.ul_cu.begin(), stacks.ul_cu.end());
  out.insert(out.end(), stacks.ul_upf.begin(), stacks.ul_upf.end());
  return out;
}

bool better_record(const PathRecord& a, const PathRecord& b) {
  if (a.rtt != b.rtt) return a.rtt < b.rtt;
  if (a.segment_count() != b.segment_count()) return a.segment_count() < b.segment_count();
  if (stack_less(a.stacks, b.stacks)) return true;
  if (stack_less(b.stacks, a.stacks)) return false;
  if (a.upf_element != b.upf_element) return a.upf_element < b.upf_element;
  return a.ec_element < b.ec_element;
}

const PathRecord* PathDatabase::find(const PathKey& key) const {
  auto it = records.find(key);
  return it == records.end() ? nullptr : &it->second;
}

std::vector<const PathRecord*> PathDatabase::for_source(int class_id, std::string_view cu) const {
  std::vector<const PathRecord*> out;
  for (auto it = records.lower_bound(PathKey{class_id, std::string(cu), "", ""});
       it != records.end() && it->first.class_id == class_id && it->first.cu == cu; ++it)
    out.push_back(&it->second);
  return out;
}

std::string PathDatabase::dump_json(const SidRegistry& registry) const {
  std::vector<const PathRecord*> sorted;
  for (const auto& [_, r] : records) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](const PathRecord* a, const PathRecord* b) {
    return std::tie(a->class_id, a->src_element, a->rtt, a->upf_element, a->ec_element) <
           std::tie(b->class_id, b->src_element, b->rtt, b->upf_element, b->ec_element);
  });
  auto stack = [](const SegmentList& s) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& sid : s) arr.push_back(sid.value);
    return arr;
  };
  nlohmann::json out = nlohmann::json::array();
  for (const auto* r : sorted) {
    out.push_back({{"class_id", r->class_id},
                   {"src", r->src_element},
                   {"upf", r->upf_element},
                   {"ec", r->ec_element},
                   {"rtt_ms", format_ms(r->rtt)},
                   {"backup_rtt_ms", format_ms(r->backup_rtt)},
                   {"protected", r->is_protected},
                   {"end_to_end", stack(r->end_to_end(registry))},
                   {"ul_stack_cu", stack(r->stacks.ul_cu)},
                   {"ul_stack_upf", stack(r->stacks.ul_upf)},
                   {"dl_stack_ec", stack(r->stacks.dl_ec)},
                   {"dl_stack_upf", stack(r->stacks.dl_upf)}});
  }
  return out.dump(2);
}

std::optional<SegmentList> encode_segments(const Topology& topology, const SidRegistry& registry,
                                           const Route& walk) {
  const Graph graph = forwarding_graph(topology);
  SegmentList out;
  const std::size_t n = walk.nodes.size();
  std::size_t i = 0;
  while (i + 1 < n) {
    std::optional<std::size_t> reach;
    for (std::size_t j = n - 1; j > i; --j) {
      const auto* rec = registry.record(walk.nodes[j]);
      if (!rec) continue;
      auto route = shortest_route(graph, walk.nodes[i], walk.nodes[j]);
      if (!route) continue;
      if (!std::equal(route->nodes.begin(), route->nodes.end(), walk.nodes.begin() + i,
                      walk.nodes.begin() + j + 1))
        continue;
      if (!std::equal(route->links.begin(), route->links.end(), walk.links.begin() + i,
                      walk.links.begin() + j))
        continue;
      try {
        if (resolve_sid(registry, topology, rec->sid, walk.nodes[i]) != walk.nodes[j]) continue;
      } catch (const Error&) {
        continue;
      }
      reach = j;
      break;
    }
    if (!reach) return std::nullopt;
    out.push_back(registry.record(walk.nodes[*reach])->sid);
    i = *reach;
  }
  return out;
}

ConstrainedPath compute_constrained_path(const Topology& topology, const SidRegistry& registry,
                                         std::string_view src, std::string_view dst,
                                         const TrafficClass& traffic_class) {
  topology.element(src);
  topology.element(dst);
  if (src == dst) return {{}, Micros{0}, Route{{std::string(src)}, {}, Micros{0}}, std::nullopt};

  const HopSet hops = expressible_hops(topology);
  auto pick = [&](const LegConstraints& c) -> std::optional<LegPath> {
    const Graph graph = class_graph(topology, c);
    std::optional<LegPath> best;
    for (auto& p : pareto_paths(topology, graph, hops, src, dst)) {
      if (p.survival < 1.0 - traffic_class.max_error_rate - kSurvivalSlack) continue;
      if (!best || p.route.delay < best->route.delay) best = std::move(p);
    }
    return best;
  };

  LegConstraints base = constraints_for(traffic_class);
  base.require_protection = false;
  auto unprotected = pick(base);
  if (!unprotected)
    throw Error(ErrorCode::Unreachable,
                std::string(src) + " -> " + std::string(dst) + " for class " +
                    std::to_string(traffic_class.class_id));
  std::optional<LegPath> chosen = unprotected;
  if (traffic_class.is_protected()) {
    chosen = pick(constraints_for(traffic_class));
    if (!chosen)
      throw Error(ErrorCode::NoDisjointPair, std::string(src) + " -> " + std::string(dst) +
                                                 " has no protectable route");
  }

  ConstrainedPath out;
  auto segments = encode_segments(topology, registry, chosen->route);
  if (!segments)
    throw Error(ErrorCode::Unreachable, "route " + std::string(src) + " -> " + std::string(dst) +
                                            " is not expressible as a segment list");
  out.segments = std::move(*segments);
  out.rtt = 2 * chosen->route.delay;
  out.primary = chosen->route;
  if (traffic_class.is_protected()) out.backup = substitute_backups(topology, chosen->route);
  return out;
}

PathDatabase build_path_database(const ControllerInputs& in) {
  PathDatabase db;
  const auto& topo = *in.topology;
  const auto cus = topo.elements_of_type(ElementType::CU);
  const auto upfs = topo.elements_of_type(ElementType::UPF);
  const auto ecs = topo.elements_of_type(ElementType::EC);
  const HopSet hops = expressible_hops(topo);

  for (int class_id : in.catalog->class_ids()) {
    const auto& tc = in.catalog->catalog_lookup(class_id);
    const Graph graph = class_graph(topo, constraints_for(tc));
    std::map<std::string, std::vector<LegPath>> n6;
    for (const auto* upf : upfs)
      for (const auto* ec : ecs)
        n6[upf->element_id + "|" + ec->element_id] =
            pareto_paths(topo, graph, hops, upf->element_id, ec->element_id);

    for (const auto* cu : cus) {
      for (const auto* upf : upfs) {
        if (upf->provider_id != cu->provider_id) continue;
        const auto n3 = pareto_paths(topo, graph, hops, cu->element_id, upf->element_id);
        for (const auto* ec : ecs) {
          PathKey key{class_id, cu->element_id, upf->element_id, ec->element_id};
          std::string reason;
          auto rec = combine(in, tc, n3, n6[upf->element_id + "|" + ec->element_id], true, &reason);
          if (rec)
            db.records.emplace(key, std::move(*rec));
          else
            db.infeasible.emplace(key, reason);
        }
      }
    }
  }
  return db;
}

OerController::OerController(ControllerInputs inputs) : in_(inputs) { rebuild(); }

void OerController::rebuild() { db_ = build_path_database(in_); }

std::optional<std::string> OerController::resolve_ec(const OerRequest& request) const {
  if (request.pinned_ec) return request.pinned_ec;
  auto app = request.required_app_sid;
  if (!app) app = in_.catalog->catalog_lookup(request.traffic_class_id).required_app_sid;
  if (!app) return std::nullopt;
  return resolve_app_host(*in_.registry, *in_.topology, *app, request.cu_id);
}

std::vector<const PathRecord*> OerController::candidates(const OerRequest& request) const {
  in_.catalog->catalog_lookup(request.traffic_class_id);
  if (!in_.registry->record(request.cu_id))
    throw Error(ErrorCode::UnknownElement, "cu " + request.cu_id);
  const auto ec = resolve_ec(request);
  const auto& provider = provider_of(*in_.topology, request.cu_id);
  auto out = db_.for_source(request.traffic_class_id, request.cu_id);
  std::erase_if(out, [&](const PathRecord* r) {
    return (ec && r->ec_element != *ec) || provider_of(*in_.topology, r->upf_element) != provider;
  });
  return out;
}

OerResponse OerController::handle_oer_request(const OerRequest& request) const {
  const auto cands = candidates(request);
  if (cands.empty())
    throw NoFeasiblePathError("class " + std::to_string(request.traffic_class_id) + " from " +
                                  request.cu_id,
                              {request.bearer_id});
  const PathRecord* best = cands.front();
  for (const auto* r : cands)
    if (better_record(*r, *best)) best = r;
  return {*best, best->upf_element, best->ec_element};
}

std::vector<OerResponse> OerController::handle_session_request(
    const std::vector<OerRequest>& requests) const {
  if (requests.empty()) return {};
  std::vector<std::vector<const PathRecord*>> per_request;
  std::vector<int> infeasible;
  std::set<std::string> upfs;
  for (const auto& req : requests) {
    per_request.push_back(candidates(req));
    if (per_request.back().empty()) infeasible.push_back(req.bearer_id);
    for (const auto* r : per_request.back()) upfs.insert(r->upf_element);
  }
  if (!infeasible.empty())
    throw NoFeasiblePathError("no class-feasible path from " + requests.front().cu_id, infeasible);

  std::optional<std::string> best_upf;
  Micros best_cost{0};
  std::vector<const PathRecord*> best_choice;
  for (const auto& upf : upfs) {
    Micros cost{0};
    std::vector<const PathRecord*> choice;
    for (const auto& cands : per_request) {
      const PathRecord* pick = nullptr;
      for (const auto* r : cands)
        if (r->upf_element == upf && (!pick || better_record(*r, *pick))) pick = r;
      if (!pick) break;
      cost += pick->rtt;
      choice.push_back(pick);
    }
    if (choice.size() != requests.size()) continue;
    if (!best_upf || cost < best_cost) {
      best_upf = upf;
      best_cost = cost;
      best_choice = std::move(choice);
    }
  }
  if (!best_upf)
    throw NoFeasiblePathError("no UPF serves every bearer from " + requests.front().cu_id);

  std::vector<OerResponse> out;
  for (const auto* r : best_choice) out.push_back({*r, r->upf_element, r->ec_element});
  return out;
}

std::vector<OerResponse> OerController::handle_path_update(
    const UeSession& session, std::string_view new_cu,
    const std::map<int, std::string>& ec_overrides) const {
  std::vector<OerRequest> requests;
  for (const auto& b : session.bearers) {
    OerRequest req;
    req.traffic_class_id = b.class_id;
    req.cu_id = std::string(new_cu);
    req.upf_id = session.serving_upf;
    req.qfi = b.qfi;
    req.bearer_id = b.bearer_id;
    req.ue_id = session.ue_id;
    auto it = ec_overrides.find(b.bearer_id);
    req.pinned_ec = it != ec_overrides.end() ? it->second : b.ec_element;
    requests.push_back(std::move(req));
  }
  return handle_session_request(requests);
}

std::optional<PathRecord> OerController::best_effort_path(
    int class_id, std::string_view cu, std::string_view ec,
    const std::optional<std::string>& only_upf) const {
  const auto& topo = *in_.topology;
  TrafficClass relaxed = in_.catalog->catalog_lookup(class_id);
  const Graph graph = class_graph(topo, {});
  const HopSet hops = expressible_hops(topo);
  std::optional<PathRecord> best;
  for (const auto* upf : topo.elements_of_type(ElementType::UPF)) {
    if (upf->provider_id != provider_of(topo, cu)) continue;
    if (only_upf && upf->element_id != *only_upf) continue;
    auto rec = combine(in_, relaxed, pareto_paths(topo, graph, hops, cu, upf->element_id),
                       pareto_paths(topo, graph, hops, upf->element_id, ec), false, nullptr);
    if (rec && (!best || better_record(*rec, *best))) best = std::move(rec);
  }
  return best;
}

}  // namespace wonder
