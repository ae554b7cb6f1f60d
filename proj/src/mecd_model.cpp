#include "wonder/mecd_model.hpp"

#include <algorithm>
#include <cstdio>

#include "wonder/error.hpp"
#include "wonder/routing.hpp"

namespace wonder {

const char* to_string(SidKind kind) {
  switch (kind) {
    case SidKind::Node: return "node";
    case SidKind::Prefix: return "prefix";
    case SidKind::Anycast: return "anycast";
    case SidKind::App: return "app";
  }
  return "?";
}

std::optional<SidKind> parse_sid_kind(std::string_view text) {
  if (text == "node") return SidKind::Node;
  if (text == "prefix") return SidKind::Prefix;
  if (text == "anycast") return SidKind::Anycast;
  if (text == "app") return SidKind::App;
  return std::nullopt;
}

Srv6Address SegmentId::to_srv6(std::uint32_t prefix_tag) const {
  Srv6Address addr{};
  for (int i = 0; i < 4; ++i) {
    addr[i] = static_cast<std::uint8_t>(prefix_tag >> (24 - 8 * i));
    addr[12 + i] = static_cast<std::uint8_t>(value >> (24 - 8 * i));
  }
  return addr;
}

std::optional<std::uint32_t> SegmentId::value_from_srv6(const Srv6Address& addr,
                                                        std::uint32_t prefix_tag) {
  std::uint32_t prefix = 0;
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    prefix = (prefix << 8) | addr[i];
    v = (v << 8) | addr[12 + i];
  }
  if (prefix != prefix_tag) return std::nullopt;
  for (int i = 4; i < 12; ++i)
    if (addr[i] != 0) return std::nullopt;
  return v;
}

std::string to_string(const SegmentId& sid) {
  std::string s = std::to_string(sid.value);
  if (sid.kind != SidKind::Node) s += std::string("/") + to_string(sid.kind);
  return s;
}

std::string format_srv6(const Srv6Address& addr) {
  std::string out;
  char buf[8];
  for (int i = 0; i < 16; i += 2) {
    if (i) out += ':';
    std::snprintf(buf, sizeof buf, "%x", (addr[i] << 8) | addr[i + 1]);
    out += buf;
  }
  return out;
}

SegmentId default_node_sid(int edc_index, int ordinal) {
  return SegmentId::node(static_cast<std::uint32_t>(1200 + 10 * edc_index + ordinal));
}

const char* to_string(ElementType type) {
  switch (type) {
    case ElementType::CU: return "CU";
    case ElementType::UPF: return "UPF";
    case ElementType::EC: return "EC";
    case ElementType::FabricRouter: return "FabricRouter";
    case ElementType::OpticalNode: return "OpticalNode";
  }
  return "?";
}

std::optional<ElementType> parse_element_type(std::string_view text) {
  if (text == "CU") return ElementType::CU;
  if (text == "UPF") return ElementType::UPF;
  if (text == "EC") return ElementType::EC;
  if (text == "FabricRouter") return ElementType::FabricRouter;
  if (text == "OpticalNode") return ElementType::OpticalNode;
  return std::nullopt;
}

bool EdcRecord::has_ec() const {
  return std::any_of(elements.begin(), elements.end(),
                     [](const ElementRecord& e) { return e.element_type == ElementType::EC; });
}

bool Link::connects(std::string_view a, std::string_view b) const {
  return (from == a && to == b) || (from == b && to == a);
}

const ElementRecord* Topology::find_element(std::string_view element_id) const {
  for (const auto& edc : edcs)
    for (const auto& e : edc.elements)
      if (e.element_id == element_id) return &e;
  return nullptr;
}

const ElementRecord& Topology::element(std::string_view element_id) const {
  if (const auto* e = find_element(element_id)) return *e;
  throw Error(ErrorCode::UnknownElement, std::string(element_id));
}

const EdcRecord* Topology::find_edc(std::string_view edc_id) const {
  for (const auto& edc : edcs)
    if (edc.edc_id == edc_id) return &edc;
  return nullptr;
}

Link* Topology::find_link(std::string_view link_id) {
  for (auto& l : links)
    if (l.link_id == link_id) return &l;
  return nullptr;
}

const Link* Topology::find_link(std::string_view link_id) const {
  for (const auto& l : links)
    if (l.link_id == link_id) return &l;
  return nullptr;
}

const Link* Topology::backup_for(std::string_view link_id) const {
  for (const auto& l : links)
    if (l.backup_of && *l.backup_of == link_id) return &l;
  return nullptr;
}

std::vector<const ElementRecord*> Topology::elements() const {
  std::vector<const ElementRecord*> out;
  for (const auto& edc : edcs)
    for (const auto& e : edc.elements) out.push_back(&e);
  std::sort(out.begin(), out.end(),
            [](const auto* a, const auto* b) { return a->element_id < b->element_id; });
  return out;
}

std::vector<const ElementRecord*> Topology::elements_of_type(ElementType type) const {
  auto all = elements();
  std::erase_if(all, [type](const auto* e) { return e->element_type != type; });
  return all;
}

bool Topology::is_inter_edc(const Link& link) const {
  const auto* a = find_element(link.from);
  const auto* b = find_element(link.to);
  return a && b && a->edc_id != b->edc_id;
}

SidRegistry::SidRegistry(std::set<std::string> known_edcs) : known_edcs_(std::move(known_edcs)) {}

SidRegistry SidRegistry::from_topology(const Topology& topology) {
  std::set<std::string> edcs;
  for (const auto& edc : topology.edcs) edcs.insert(edc.edc_id);
  SidRegistry registry(std::move(edcs));
  for (const auto* e : topology.elements()) registry.register_element(*e);
  return registry;
}

void SidRegistry::register_element(const ElementRecord& record) {
  if (!known_edcs_.empty() && known_edcs_.count(record.edc_id) == 0)
    throw Error(ErrorCode::UnknownEdc, record.edc_id + " (element " + record.element_id + ")");

  if (auto it = records_.find(record.element_id); it != records_.end()) {
    if (it->second == record) return;
  }

  // Check every binding before touching state so a failed registration leaves
  // the registry unchanged.
  std::vector<SegmentId> sids{record.sid};
  sids.insert(sids.end(), record.app_ids.begin(), record.app_ids.end());
  for (const auto& sid : sids) {
    if (sid.kind == SidKind::Anycast) continue;
    auto it = bindings_.find(sid);
    if (it == bindings_.end()) continue;
    for (const auto& owner : it->second)
      if (owner != record.element_id)
        throw Error(ErrorCode::DuplicateSid,
                    to_string(sid) + " already bound to " + owner + ", not " + record.element_id);
  }

  if (auto it = records_.find(record.element_id); it != records_.end()) {
    // Re-registration with different content replaces the old bindings.
    std::vector<SegmentId> old{it->second.sid};
    old.insert(old.end(), it->second.app_ids.begin(), it->second.app_ids.end());
    for (const auto& sid : old) {
      auto b = bindings_.find(sid);
      if (b == bindings_.end()) continue;
      b->second.erase(record.element_id);
      if (b->second.empty()) bindings_.erase(b);
    }
  }
  records_[record.element_id] = record;
  for (const auto& sid : sids) bind(sid, record.element_id);
}

void SidRegistry::bind(const SegmentId& sid, const std::string& element_id) {
  bindings_[sid].insert(element_id);
}

std::vector<std::string> SidRegistry::bound_elements(const SegmentId& sid) const {
  auto it = bindings_.find(sid);
  if (it == bindings_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

bool SidRegistry::contains(const SegmentId& sid) const { return bindings_.count(sid) != 0; }

const ElementRecord* SidRegistry::record(std::string_view element_id) const {
  auto it = records_.find(std::string(element_id));
  return it == records_.end() ? nullptr : &it->second;
}

std::vector<std::string> SidRegistry::elements_in_edc(std::string_view edc_id) const {
  std::vector<std::string> out;
  for (const auto& [id, rec] : records_)
    if (rec.edc_id == edc_id) out.push_back(id);
  return out;
}

std::vector<std::string> SidRegistry::elements_of_type(ElementType type) const {
  std::vector<std::string> out;
  for (const auto& [id, rec] : records_)
    if (rec.element_type == type) out.push_back(id);
  return out;
}

std::vector<SegmentId> SidRegistry::sids() const {
  std::vector<SegmentId> out;
  for (const auto& [sid, _] : bindings_) out.push_back(sid);
  return out;
}

std::string resolve_sid(const SidRegistry& registry, const Topology& topology,
                        const SegmentId& sid, std::string_view from_element) {
  auto bound = registry.bound_elements(sid);
  if (bound.empty()) throw Error(ErrorCode::UnknownSid, to_string(sid));
  if (sid.kind != SidKind::Anycast) return bound.front();

  const Graph graph = admin_up_graph(topology);
  auto from = graph.index(from_element);
  if (!from) throw Error(ErrorCode::UnknownElement, std::string(from_element));
  // Links are symmetric, so distances toward `from` are distances from it.
  const auto dist = distances_to(graph, *from);
  std::optional<std::string> best;
  Micros best_delay{0};
  for (const auto& candidate : bound) {  // sorted by element_id
    auto idx = graph.index(candidate);
    if (!idx || !dist[*idx]) continue;
    if (!best || dist[*idx]->delay < best_delay) {
      best = candidate;
      best_delay = dist[*idx]->delay;
    }
  }
  if (!best) throw Error(ErrorCode::NoLiveInstance, to_string(sid));
  return *best;
}

std::string resolve_app_host(const SidRegistry& registry, const Topology& topology,
                             const SegmentId& app_sid, std::string_view from_element) {
  if (!registry.contains(app_sid))
    throw Error(ErrorCode::AppNotPresent, to_string(app_sid) + " is not hosted by any EC");
  try {
    return resolve_sid(registry, topology, app_sid, from_element);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NoLiveInstance)
      throw Error(ErrorCode::AppNotPresent, to_string(app_sid) + " has no reachable instance");
    throw;
  }
}

}  // namespace wonder
