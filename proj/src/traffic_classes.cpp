#include "wonder/traffic_classes.hpp"

#include <algorithm>

#include "wonder/error.hpp"

namespace wonder {

TrafficCatalog::TrafficCatalog(std::vector<TrafficClass> classes) {
  for (auto& c : classes) {
    auto problems = validate(c);
    if (!problems.empty()) throw ValidationError(std::move(problems));
    const int id = c.class_id;
    if (!classes_.emplace(id, std::move(c)).second)
      throw ValidationError({"classes: duplicate class_id " + std::to_string(id)});
  }
}

TrafficCatalog TrafficCatalog::defaults() {
  TrafficClass c0;
  c0.class_id = 0;
  c0.latency_bound_rtt = Micros{7000};
  c0.peak_rate_gbps = 1.0;
  c0.restoration = Micros{50000};
  c0.max_error_rate = 0.0001;
  c0.qos.qfi = 5;

  TrafficClass c1;
  c1.class_id = 1;
  c1.latency_bound_rtt = Micros{20000};
  c1.peak_rate_gbps = 5.0;
  c1.max_error_rate = 0.001;
  c1.qos.qfi = 9;

  return TrafficCatalog({c0, c1});
}

const TrafficClass& TrafficCatalog::catalog_lookup(int class_id) const {
  auto it = classes_.find(class_id);
  if (it == classes_.end()) throw Error(ErrorCode::UnknownClass, std::to_string(class_id));
  return it->second;
}

std::vector<int> TrafficCatalog::class_ids() const {
  std::vector<int> ids;
  for (const auto& [id, _] : classes_) ids.push_back(id);
  return ids;
}

std::optional<Micros> TrafficCatalog::min_restoration() const {
  std::optional<Micros> best;
  for (const auto& [_, c] : classes_)
    if (c.restoration && (!best || *c.restoration < *best)) best = c.restoration;
  return best;
}

std::vector<std::string> validate(const TrafficClass& tc) {
  std::vector<std::string> problems;
  const std::string where = "classes[" + std::to_string(tc.class_id) + "]";
  if (tc.class_id < 0) problems.push_back(where + ".class_id: must be non-negative");
  if (tc.latency_bound_rtt <= Micros{0})
    problems.push_back(where + ".latency_bound_rtt_ms: must be > 0");
  if (tc.peak_rate_gbps <= 0.0) problems.push_back(where + ".peak_rate_gbps: must be > 0");
  if (tc.restoration && *tc.restoration <= Micros{0})
    problems.push_back(where + ".resiliency.restoration_ms: must be > 0");
  if (tc.max_error_rate < 0.0 || tc.max_error_rate > 1.0)
    problems.push_back(where + ".max_error_rate: must lie in [0, 1]");
  if (tc.qos.mpls_exp && *tc.qos.mpls_exp > 7)
    problems.push_back(where + ".qos.mpls_exp: must fit in 3 bits");
  if (tc.qos.ipv6_flow_label && *tc.qos.ipv6_flow_label > 0xFFFFF)
    problems.push_back(where + ".qos.ipv6_flow_label: must fit in 20 bits");
  if (tc.required_app_sid && tc.required_app_sid->kind != SidKind::App &&
      tc.required_app_sid->kind != SidKind::Anycast)
    problems.push_back(where + ".required_app_sid: must be an app or anycast SID");
  return problems;
}

void SessionBindings::bind(const QfiBinding& binding) {
  for (const auto& b : bindings_) {
    if (b.qfi == binding.qfi)
      throw Error(ErrorCode::DuplicateQfi, "qfi " + std::to_string(binding.qfi) +
                                               " already bound on bearer " +
                                               std::to_string(b.bearer_id));
  }
  bindings_.push_back(binding);
}

const QfiBinding& SessionBindings::binding(int qfi) const {
  auto it = std::find_if(bindings_.begin(), bindings_.end(),
                         [qfi](const QfiBinding& b) { return b.qfi == qfi; });
  if (it == bindings_.end()) throw Error(ErrorCode::UnboundQfi, "qfi " + std::to_string(qfi));
  return *it;
}

int SessionBindings::map_qfi(int qfi) const { return binding(qfi).class_id; }

}  // namespace wonder
