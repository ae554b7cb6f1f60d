#include "wonder/path_oracle.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <sstream>

#include "wonder/error.hpp"
#include "wonder/sr_dataplane.hpp"
#include "wonder/topology_loader.hpp"

namespace wonder {

namespace {

constexpr double kSlack = 1e-12;
constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

struct OEdge {
  int a = 0;
  int b = 0;
  std::int64_t delay = 0;
  int link = -1;
};

struct LegStats {
  std::int64_t delay = 0;
  std::int64_t backup = 0;
  double survival = 1.0;
};

// Plain re-derivation of the element graph, kept apart from the routing code.
class OracleGraph {
 public:
  explicit OracleGraph(const Topology& t) : topo_(t) {
    for (const auto& edc : t.edcs)
      for (const auto& e : edc.elements) elems_.push_back(&e);
    std::sort(elems_.begin(), elems_.end(),
              [](auto* x, auto* y) { return x->element_id < y->element_id; });
    const int n = static_cast<int>(elems_.size());
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (elems_[i]->edc_id != elems_[j]->edc_id) continue;
        auto ti = elems_[i]->element_type, tj = elems_[j]->element_type;
        bool router = ti == ElementType::FabricRouter || tj == ElementType::FabricRouter;
        bool n3 = (ti == ElementType::CU && tj == ElementType::UPF) ||
                  (ti == ElementType::UPF && tj == ElementType::CU);
        if (router || n3) edges_.push_back({i, j, t.intra_edc_delay.count(), -1});
      }
    }
    for (std::size_t l = 0; l < t.links.size(); ++l)
      edges_.push_back({index(t.links[l].from), index(t.links[l].to), t.links[l].delay.count(),
                        static_cast<int>(l)});

    // Forwarding distances over links that carry routing state.
    dist_.assign(n, std::vector<std::int64_t>(n, kInf));
    for (int i = 0; i < n; ++i) dist_[i][i] = 0;
    for (const auto& e : edges_) {
      if (!forwarding(e)) continue;
      dist_[e.a][e.b] = std::min(dist_[e.a][e.b], e.delay);
      dist_[e.b][e.a] = std::min(dist_[e.b][e.a], e.delay);
    }
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (dist_[i][k] < kInf && dist_[k][j] < kInf)
            dist_[i][j] = std::min(dist_[i][j], dist_[i][k] + dist_[k][j]);
  }

  int index(const std::string& id) const {
    for (std::size_t i = 0; i < elems_.size(); ++i)
      if (elems_[i]->element_id == id) return static_cast<int>(i);
    return -1;
  }
  int size() const { return static_cast<int>(elems_.size()); }
  const ElementRecord& elem(int i) const { return *elems_[i]; }

  bool forwarding(const OEdge& e) const {
    if (e.link < 0) return true;
    const auto& l = topo_.links[e.link];
    return l.admin_up || l.restoring;
  }

  const Link* backup_of(const Link& primary) const {
    for (const auto& l : topo_.links)
      if (l.backup_of && *l.backup_of == primary.link_id) return &l;
    return nullptr;
  }

  // A single hop the forwarding plane would take on its own.
  bool realizable(const OEdge& e) const {
    if (!forwarding(e) || e.delay != dist_[e.a][e.b]) return false;
    for (const auto& o : edges_) {
      if (&o == &e || !forwarding(o)) continue;
      bool parallel = (o.a == e.a && o.b == e.b) || (o.a == e.b && o.b == e.a);
      if (parallel && o.delay == e.delay && o.link < e.link) return false;
    }
    return true;
  }

  bool admits(const OEdge& e, const TrafficClass& tc) const {
    if (e.link < 0) return true;
    const auto& l = topo_.links[e.link];
    if (!l.admin_up || l.capacity_gbps < tc.peak_rate_gbps) return false;
    if (tc.is_protected() && elem(e.a).edc_id != elem(e.b).edc_id)
      return l.is_protected && backup_of(l) != nullptr;
    return true;
  }

  LegStats stats(const OEdge& e) const {
    if (e.link < 0) return {e.delay, e.delay, 1.0};
    const auto& l = topo_.links[e.link];
    std::int64_t backup = e.delay;
    if (l.is_protected)
      if (const Link* b = backup_of(l)) backup = b->delay.count();
    return {e.delay, backup, 1.0 - l.error_rate};
  }

  // Every simple walk src -> dst made of admitted, realizable hops.
  std::vector<LegStats> walks(int src, int dst, const TrafficClass& tc) const {
    std::vector<LegStats> out;
    std::vector<bool> visited(size(), false);
    visited[src] = true;
    dfs(src, dst, tc, {}, visited, out);
    return out;
  }

 private:
  void dfs(int u, int dst, const TrafficClass& tc, LegStats acc, std::vector<bool>& visited,
           std::vector<LegStats>& out) const {
    if (u == dst) {
      out.push_back(acc);
      return;
    }
    for (const auto& e : edges_) {
      int v;
      if (e.a == u) v = e.b;
      else if (e.b == u) v = e.a;
      else continue;
      if (visited[v] || !admits(e, tc) || !realizable(e)) continue;
      const LegStats s = stats(e);
      visited[v] = true;
      dfs(v, dst, tc, {acc.delay + s.delay, acc.backup + s.backup, acc.survival * s.survival},
          visited, out);
      visited[v] = false;
    }
  }

  const Topology& topo_;
  std::vector<const ElementRecord*> elems_;
  std::vector<OEdge> edges_;
  std::vector<std::vector<std::int64_t>> dist_;
};

}  // namespace

std::map<PathKey, OracleResult> oracle_min_rtts(const Topology& topology,
                                                const TrafficCatalog& catalog, Micros air_rtt) {
  const OracleGraph g(topology);
  std::map<PathKey, OracleResult> out;
  std::vector<int> cus, upfs, ecs;
  for (int i = 0; i < g.size(); ++i) {
    switch (g.elem(i).element_type) {
      case ElementType::CU: cus.push_back(i); break;
      case ElementType::UPF: upfs.push_back(i); break;
      case ElementType::EC: ecs.push_back(i); break;
      default: break;
    }
  }
  for (int class_id : catalog.class_ids()) {
    const auto& tc = catalog.catalog_lookup(class_id);
    for (int cu : cus) {
      for (int upf : upfs) {
        if (g.elem(upf).provider_id != g.elem(cu).provider_id) continue;
        const auto first = g.walks(cu, upf, tc);
        for (int ec : ecs) {
          const auto second = g.walks(upf, ec, tc);
          OracleResult best{Micros{kInf}, 0};
          for (const auto& a : first) {
            for (const auto& b : second) {
              const std::int64_t rtt = air_rtt.count() + 2 * (a.delay + b.delay);
              const std::int64_t backup = air_rtt.count() + 2 * (a.backup + b.backup);
              if (rtt > tc.latency_bound_rtt.count()) continue;
              if (tc.is_protected() && backup > tc.latency_bound_rtt.count()) continue;
              if (a.survival * b.survival < 1.0 - tc.max_error_rate - kSlack) continue;
              ++best.feasible_walks;
              best.rtt = std::min(best.rtt, Micros{rtt});
            }
          }
          if (best.feasible_walks > 0)
            out.emplace(PathKey{class_id, g.elem(cu).element_id, g.elem(upf).element_id,
                                g.elem(ec).element_id},
                        best);
        }
      }
    }
  }
  return out;
}

namespace {

// Replays a record's stacks through the data plane and returns the measured RTT.
std::optional<Micros> replay(const Topology& topo, const SidRegistry& reg, const PathRecord& r,
                             Micros air) {
  auto leg = [&](const SegmentList& stack, const std::string& from,
                 const std::string& expect) -> std::optional<Micros> {
    Packet p;
    p.install(stack);
    auto outcome = forward(topo, reg, p, from, Micros{0});
    if (outcome.status != ForwardingStatus::Delivered || outcome.at_element != expect)
      return std::nullopt;
    return outcome.at_time;
  };
  auto a = leg(r.stacks.ul_cu, r.src_element, r.upf_element);
  auto b = leg(r.stacks.ul_upf, r.upf_element, r.ec_element);
  auto c = leg(r.stacks.dl_ec, r.ec_element, r.upf_element);
  auto d = leg(r.stacks.dl_upf, r.upf_element, r.src_element);
  if (!a || !b || !c || !d) return std::nullopt;
  return air + *a + *b + *c + *d;
}

std::string key_text(const PathKey& k) {
  return "class " + std::to_string(k.class_id) + " " + k.cu + " -> " + k.upf + " -> " + k.ec;
}

}  // namespace

OracleReport diff_against_oracle(const OerController& controller) {
  const auto& in = controller.inputs();
  const auto& topo = *in.topology;
  const auto oracle = oracle_min_rtts(topo, *in.catalog, in.air_rtt);
  const auto& db = controller.database();
  OracleReport report;

  for (int class_id : in.catalog->class_ids()) {
    const auto& tc = in.catalog->catalog_lookup(class_id);
    for (const auto* cu : topo.elements_of_type(ElementType::CU)) {
      Micros oracle_best{kInf};
      for (const auto* upf : topo.elements_of_type(ElementType::UPF)) {
        if (upf->provider_id != cu->provider_id) continue;
        for (const auto* ec : topo.elements_of_type(ElementType::EC)) {
          PathKey key{class_id, cu->element_id, upf->element_id, ec->element_id};
          ++report.combinations;
          auto o = oracle.find(key);
          const PathRecord* r = db.find(key);
          const bool hosts = !tc.required_app_sid ||
                             std::count(ec->app_ids.begin(), ec->app_ids.end(), *tc.required_app_sid);
          if (o != oracle.end() && hosts) oracle_best = std::min(oracle_best, o->second.rtt);
          if (o == oracle.end() && !r) continue;
          if (o == oracle.end()) {
            report.diffs.push_back({key, "controller feasible at " + format_ms(r->rtt) +
                                             " ms, oracle infeasible"});
            continue;
          }
          if (!r) {
            report.diffs.push_back({key, "oracle feasible at " + format_ms(o->second.rtt) +
                                             " ms, controller infeasible"});
            continue;
          }
          ++report.feasible;
          if (r->rtt != o->second.rtt)
            report.diffs.push_back({key, "rtt " + format_ms(r->rtt) + " ms, oracle " +
                                             format_ms(o->second.rtt) + " ms"});
          auto measured = replay(topo, *in.registry, *r, in.air_rtt);
          if (!measured)
            report.diffs.push_back({key, "stacks do not deliver on the data plane"});
          else if (*measured != r->rtt)
            report.diffs.push_back({key, "stacks measure " + format_ms(*measured) +
                                             " ms, record says " + format_ms(r->rtt) + " ms"});
        }
      }

      if (tc.required_app_sid && tc.required_app_sid->kind == SidKind::Anycast) continue;
      OerRequest req;
      req.traffic_class_id = class_id;
      req.cu_id = cu->element_id;
      PathKey where{class_id, cu->element_id, "*", "*"};
      try {
        auto resp = controller.handle_oer_request(req);
        if (oracle_best.count() >= kInf)
          report.diffs.push_back({where, "controller selected a path, oracle has none"});
        else if (resp.path.rtt != oracle_best)
          report.diffs.push_back({where, "selected rtt " + format_ms(resp.path.rtt) +
                                             " ms, oracle minimum " + format_ms(oracle_best) +
                                             " ms"});
      } catch (const Error& e) {
        if (oracle_best.count() < kInf)
          report.diffs.push_back({where, std::string("controller refused (") + to_string(e.code()) +
                                             "), oracle minimum " + format_ms(oracle_best) +
                                             " ms"});
      }
    }
  }
  return report;
}

std::string format_report(const OracleReport& report) {
  std::ostringstream out;
  out << "combinations " << report.combinations << ", feasible " << report.feasible << ", diffs "
      << report.diffs.size() << '\n';
  for (const auto& d : report.diffs) out << "  " << key_text(d.key) << ": " << d.message << '\n';
  return out.str();
}

Topology random_topology(std::uint64_t seed, int max_forwarding) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::uint64_t n) { return static_cast<int>(rng() % n); };

  Topology t;
  const int n_edc = 2 + pick(2);
  int budget = std::max(max_forwarding, n_edc + 3) - n_edc;
  const bool two_providers = pick(4) == 0;
  for (int e = 0; e < n_edc; ++e) {
    EdcRecord edc;
    edc.edc_id = "edc-" + std::to_string(e + 1);
    const std::string provider = two_providers && e == 1 ? "p2" : "p1";
    edc.elements.push_back({"r-" + std::to_string(e + 1), ElementType::FabricRouter,
                            SegmentId::node(100 + e), edc.edc_id, provider, {}});
    std::vector<ElementType> roles;
    if (e == 0) {
      roles = {ElementType::CU, ElementType::UPF, ElementType::EC};
    } else {
      for (auto type : {ElementType::CU, ElementType::UPF, ElementType::EC})
        if (pick(2) == 0) roles.push_back(type);
    }
    int ordinal = 0;
    for (auto type : roles) {
      if (budget == 0) break;
      --budget;
      std::string prefix = type == ElementType::CU ? "cu-" : type == ElementType::UPF ? "upf-" : "ec-";
      edc.elements.push_back({prefix + std::to_string(e + 1), type, default_node_sid(e + 1, ordinal++),
                              edc.edc_id, provider, {}});
    }
    t.edcs.push_back(std::move(edc));
  }

  int next_link = 0;
  auto add_link = [&](const std::string& a, const std::string& b) {
    Link l;
    l.link_id = "l" + std::to_string(next_link++);
    l.from = a;
    l.to = b;
    l.delay = Micros{50 * (1 + pick(60))};
    const double caps[] = {1.0, 10.0, 100.0};
    l.capacity_gbps = caps[pick(3)];
    l.error_rate = pick(4) == 0 ? 1e-5 * (1 + pick(20)) : 0.0;
    l.is_protected = pick(2) == 0;
    t.links.push_back(l);
    if (l.is_protected) {
      Link b = l;
      b.link_id = "l" + std::to_string(next_link++) + "b";
      b.is_protected = false;
      b.backup_of = l.link_id;
      b.admin_up = false;
      b.delay = l.delay + Micros{50 * pick(10)};
      t.links.push_back(b);
    }
  };
  for (int e = 0; e + 1 < n_edc; ++e)
    add_link("r-" + std::to_string(e + 1), "r-" + std::to_string(e + 2));
  if (n_edc == 3 && pick(2) == 0) add_link("r-1", "r-3");
  if (pick(3) == 0) add_link("r-1", "r-2");
  if (pick(3) == 0) {
    const auto& edc = t.edcs[pick(n_edc)];
    const auto& elem = edc.elements[pick(edc.elements.size())];
    const int other = pick(n_edc);
    if (elem.edc_id != t.edcs[other].edc_id && elem.element_type != ElementType::FabricRouter)
      add_link(elem.element_id, "r-" + std::to_string(other + 1));
  }
  return t;
}

nlohmann::json topology_to_json(const Topology& topology) {
  using nlohmann::json;
  json edcs = json::array();
  for (const auto& edc : topology.edcs) {
    json elements = json::array();
    for (const auto& e : edc.elements) {
      json apps = json::array();
      for (const auto& a : e.app_ids) apps.push_back({{"sid", a.value}, {"kind", to_string(a.kind)}});
      json x = {{"id", e.element_id},
                {"type", to_string(e.element_type)},
                {"sid", e.sid.value},
                {"sid_kind", to_string(e.sid.kind)},
                {"provider", e.provider_id}};
      if (!apps.empty()) x["apps"] = apps;
      elements.push_back(x);
    }
    edcs.push_back({{"id", edc.edc_id}, {"elements", elements}});
  }
  json links = json::array();
  for (const auto& l : topology.links) {
    json x = {{"id", l.link_id},
              {"from", l.from},
              {"to", l.to},
              {"delay_ms", to_ms(l.delay)},
              {"capacity_gbps", l.capacity_gbps},
              {"protected", l.is_protected},
              {"admin_up", l.admin_up},
              {"error_rate", l.error_rate}};
    if (l.backup_of) x["backup_of"] = *l.backup_of;
    links.push_back(x);
  }
  return {{"format_version", 1}, {"intra_edc_delay_ms", to_ms(topology.intra_edc_delay)}, {"edcs", edcs}, {"links", links}};
}

}  // namespace wonder
