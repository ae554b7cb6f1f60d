#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "wonder/time.hpp"

namespace wonder {

enum class SidKind { Node, Prefix, Anycast, App };

const char* to_string(SidKind kind);
std::optional<SidKind> parse_sid_kind(std::string_view text);

/// 128-bit SRv6 rendering of a segment: prefix tag | 64 zero bits | value.
using Srv6Address = std::array<std::uint8_t, 16>;

struct SegmentId {
  std::uint32_t value = 0;
  SidKind kind = SidKind::Node;

  auto operator<=>(const SegmentId&) const = default;

  static SegmentId node(std::uint32_t v) { return {v, SidKind::Node}; }
  static SegmentId prefix(std::uint32_t v) { return {v, SidKind::Prefix}; }
  static SegmentId anycast(std::uint32_t v) { return {v, SidKind::Anycast}; }
  static SegmentId app(std::uint32_t v) { return {v, SidKind::App}; }

  Srv6Address to_srv6(std::uint32_t prefix_tag) const;
  /// Inverse of to_srv6; the kind is not encoded in the address.
  static std::optional<std::uint32_t> value_from_srv6(const Srv6Address& addr,
                                                      std::uint32_t prefix_tag);
};

std::string to_string(const SegmentId& sid);
std::string format_srv6(const Srv6Address& addr);

/// Default SID layout for EDC-local elements: 12E0 + ordinal, where E is the
/// EDC's 1-based index (edc 1 -> 1210, 1211, ...).
SegmentId default_node_sid(int edc_index, int ordinal);

enum class ElementType { CU, UPF, EC, FabricRouter, OpticalNode };

const char* to_string(ElementType type);
std::optional<ElementType> parse_element_type(std::string_view text);

struct ElementRecord {
  std::string element_id;
  ElementType element_type = ElementType::CU;
  SegmentId sid;
  std::string edc_id;
  std::string provider_id;
  std::vector<SegmentId> app_ids;

  bool operator==(const ElementRecord&) const = default;
};

struct EdcRecord {
  std::string edc_id;
  std::vector<ElementRecord> elements;

  bool has_ec() const;
};

struct Link {
  std::string link_id;
  std::string from;
  std::string to;
  Micros delay{0};
  double capacity_gbps = 1.0;
  bool is_protected = false;
  std::optional<std::string> backup_of;
  bool admin_up = true;
  double error_rate = 0.0;
  /// Set while a protected link is failed and its backup is not yet switched in.
  bool restoring = false;

  bool connects(std::string_view a, std::string_view b) const;
};

struct Topology {
  std::vector<EdcRecord> edcs;
  std::vector<Link> links;
  Micros intra_edc_delay{50};
  std::uint32_t srv6_prefix_tag = 0xfd000000;

  const ElementRecord* find_element(std::string_view element_id) const;
  const ElementRecord& element(std::string_view element_id) const;
  const EdcRecord* find_edc(std::string_view edc_id) const;
  Link* find_link(std::string_view link_id);
  const Link* find_link(std::string_view link_id) const;
  /// The standby link provisioned to protect `link_id`, if any.
  const Link* backup_for(std::string_view link_id) const;
  /// All elements, sorted by element_id.
  std::vector<const ElementRecord*> elements() const;
  std::vector<const ElementRecord*> elements_of_type(ElementType type) const;
  bool is_inter_edc(const Link& link) const;
};

/// SID bindings for a MECD. Non-anycast SIDs bind exactly one element.
class SidRegistry {
 public:
  explicit SidRegistry(std::set<std::string> known_edcs = {});

  static SidRegistry from_topology(const Topology& topology);

  void register_element(const ElementRecord& record);

  std::vector<std::string> bound_elements(const SegmentId& sid) const;
  bool contains(const SegmentId& sid) const;
  const ElementRecord* record(std::string_view element_id) const;
  std::vector<std::string> elements_in_edc(std::string_view edc_id) const;
  std::vector<std::string> elements_of_type(ElementType type) const;
  std::vector<SegmentId> sids() const;

  bool operator==(const SidRegistry&) const = default;

 private:
  void bind(const SegmentId& sid, const std::string& element_id);

  std::set<std::string> known_edcs_;
  std::map<std::string, ElementRecord> records_;
  std::map<SegmentId, std::set<std::string>> bindings_;
};

/// Resolves `sid` to the element it addresses when seen from `from_element`.
/// Anycast SIDs pick the live instance with minimal path delay over admin_up
/// links, ties going to the smallest element_id.
std::string resolve_sid(const SidRegistry& registry, const Topology& topology,
                        const SegmentId& sid, std::string_view from_element);

/// Hosting EC for an application SID (unique host, or nearest anycast
/// instance from `from_element`). Throws AppNotPresent when nothing hosts it.
std::string resolve_app_host(const SidRegistry& registry, const Topology& topology,
                             const SegmentId& app_sid, std::string_view from_element);

}  // namespace wonder
