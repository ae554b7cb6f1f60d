#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "wonder/mecd_model.hpp"
#include "wonder/time.hpp"

namespace wonder {

struct QosMarkers {
  std::optional<int> qfi;
  std::optional<std::uint8_t> mpls_exp;         // 3 bits
  std::optional<std::uint32_t> ipv6_flow_label;  // 20 bits
  bool operator==(const QosMarkers&) const = default;
};

struct TrafficClass {
  int class_id = 0;
  Micros latency_bound_rtt{0};
  double peak_rate_gbps = 0.0;
  /// Present for Protected classes.
  std::optional<Micros> restoration;
  double max_error_rate = 0.0;
  QosMarkers qos;
  std::optional<SegmentId> required_app_sid;

  bool is_protected() const { return restoration.has_value(); }
  bool operator==(const TrafficClass&) const = default;
};

/// Immutable set of traffic classes keyed by class id.
class TrafficCatalog {
 public:
  TrafficCatalog() = default;
  explicit TrafficCatalog(std::vector<TrafficClass> classes);

  /// Class 0 (7 ms RTT, 1 Gbps, protected 50 ms, 0.01%) and class 1
  /// (20 ms RTT, 5 Gbps, unprotected, 0.1%).
  static TrafficCatalog defaults();

  const TrafficClass& catalog_lookup(int class_id) const;
  bool contains(int class_id) const { return classes_.count(class_id) != 0; }
  std::vector<int> class_ids() const;
  /// Smallest restoration time over the protected classes, if any.
  std::optional<Micros> min_restoration() const;

 private:
  std::map<int, TrafficClass> classes_;
};

/// Checks the field invariants of a class; returns one message per problem.
std::vector<std::string> validate(const TrafficClass& tc);

struct QfiBinding {
  int qfi = 0;
  int class_id = 0;
  int bearer_id = 0;
};

/// QFI -> class bindings of one PDU session.
class SessionBindings {
 public:
  void bind(const QfiBinding& binding);
  int map_qfi(int qfi) const;
  const QfiBinding& binding(int qfi) const;
  const std::vector<QfiBinding>& all() const { return bindings_; }

 private:
  std::vector<QfiBinding> bindings_;
};

}  // namespace wonder
