#include "wonder/awdc.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "wonder/error.hpp"
#include "wonder/signaling_log.hpp"

namespace wonder {

const char* to_string(WorkloadState state) {
  switch (state) {
    case WorkloadState::Activating: return "Activating";
    case WorkloadState::Active: return "Active";
    case WorkloadState::Replicating: return "Replicating";
    case WorkloadState::Retired: return "Retired";
  }
  return "?";
}

SegmentId bearer_app(const Bearer& bearer) { return bearer.app_sid; }

TrendPredictor::TrendPredictor(std::map<std::string, std::set<std::string>> edc_adjacency,
                               std::size_t k, double full_scale)
    : adjacency_(std::move(edc_adjacency)), k_(std::max<std::size_t>(k, 2)), full_scale_(full_scale) {}

std::optional<Prediction> TrendPredictor::predict(const std::vector<MobilitySample>& history,
                                                  Micros horizon) const {
  if (history.size() < 2)
    throw Error(ErrorCode::PreconditionViolation, "prediction needs at least two samples");
  const std::size_t n = std::min(k_, history.size());
  const auto first = history.end() - static_cast<std::ptrdiff_t>(n);
  const auto& last = history.back();

  for (auto it = first; it != history.end(); ++it) {
    if (!it->radio_signal_hint) return std::nullopt;
    if (it != first && *it->radio_signal_hint > *(it - 1)->radio_signal_hint) return std::nullopt;
  }
  const double h0 = *first->radio_signal_hint;
  const double hn = *last.radio_signal_hint;
  if (!(h0 > hn) || last.time <= first->time) return std::nullopt;

  const double slope = (hn - h0) / to_ms(last.time - first->time);
  const double projected = hn + slope * to_ms(horizon);
  const double confidence = std::clamp((h0 - projected) / full_scale_, 0.0, 1.0);

  std::optional<std::string> target;
  if (last.neighbor_edc && *last.neighbor_edc != last.current_edc) {
    target = last.neighbor_edc;
  } else if (auto adj = adjacency_.find(last.current_edc); adj != adjacency_.end()) {
    std::set<std::string> visited;
    for (const auto& s : history) visited.insert(s.current_edc);
    std::vector<std::string> left;
    for (const auto& e : adj->second)
      if (!visited.count(e)) left.push_back(e);
    if (left.size() == 1) target = left.front();
  }
  if (!target) return std::nullopt;
  return Prediction{*target, confidence};
}

std::map<std::string, std::set<std::string>> edc_adjacency(const Topology& topology) {
  std::map<std::string, std::set<std::string>> out;
  for (const auto& l : topology.links) {
    if (!l.admin_up) continue;
    const auto* a = topology.find_element(l.from);
    const auto* b = topology.find_element(l.to);
    if (!a || !b || a->edc_id == b->edc_id) continue;
    out[a->edc_id].insert(b->edc_id);
    out[b->edc_id].insert(a->edc_id);
  }
  return out;
}

std::optional<Prediction> predict_handover(const std::vector<MobilitySample>& history,
                                           Micros horizon, const Topology& topology) {
  return TrendPredictor(edc_adjacency(topology)).predict(history, horizon);
}

Awdc::Awdc(const Topology* topology, const SidRegistry* registry, AwdcConfig config)
    : topology_(topology), registry_(registry), config_(config) {}

void Awdc::log(const Workload& w, WorkloadState state, Micros time) {
  ledger_.push_back({time, w.app_sid, w.ue_scope, w.ec_element, state});
}

Workload& Awdc::mutable_workload(int id) {
  if (id < 0 || id >= static_cast<int>(workloads_.size()))
    throw Error(ErrorCode::PreconditionViolation, "unknown workload " + std::to_string(id));
  return workloads_[id];
}

const Workload& Awdc::workload(int id) const {
  if (id < 0 || id >= static_cast<int>(workloads_.size()))
    throw Error(ErrorCode::PreconditionViolation, "unknown workload " + std::to_string(id));
  return workloads_[id];
}

int Awdc::live_on(const std::string& ec) const {
  return static_cast<int>(std::count_if(workloads_.begin(), workloads_.end(), [&](const Workload& w) {
    return w.ec_element == ec && w.state != WorkloadState::Retired;
  }));
}

const Workload& Awdc::activate(const SegmentId& app_sid, const std::string& ec,
                               const std::optional<std::string>& ue_scope, Micros now) {
  const auto* rec = topology_->find_element(ec);
  if (!rec || rec->element_type != ElementType::EC)
    throw Error(ErrorCode::NotAnEc, ec + " is not an EC");
  for (const auto& w : workloads_)
    if (w.app_sid == app_sid && w.ue_scope == ue_scope && w.ec_element == ec &&
        w.state != WorkloadState::Retired)
      return w;
  if (live_on(ec) >= config_.slots_per_ec)
    throw Error(ErrorCode::CapacityExceeded, ec + " has no free workload slot");

  Workload w;
  w.workload_id = static_cast<int>(workloads_.size());
  w.app_sid = app_sid;
  w.ue_scope = ue_scope;
  w.ec_element = ec;
  w.state = WorkloadState::Active;
  w.activated_at = now + config_.activate_delay;
  w.ready_at = w.activated_at;
  log(w, WorkloadState::Activating, now);
  log(w, WorkloadState::Active, w.activated_at);
  workloads_.push_back(std::move(w));
  return workloads_.back();
}

const Workload& Awdc::replicate(int source_id, const std::string& target_ec, Micros now,
                                bool speculative) {
  const Workload source = workload(source_id);
  const auto* rec = topology_->find_element(target_ec);
  if (!rec || rec->element_type != ElementType::EC)
    throw Error(ErrorCode::NotAnEc, target_ec + " is not an EC");
  if (const Workload* existing = standby(source.app_sid, source.ue_scope, target_ec))
    return *existing;
  if (live_on(target_ec) >= config_.slots_per_ec)
    throw Error(ErrorCode::CapacityExceeded, target_ec + " has no free workload slot");

  Workload w;
  w.workload_id = static_cast<int>(workloads_.size());
  w.app_sid = source.app_sid;
  w.ue_scope = source.ue_scope;
  w.ec_element = target_ec;
  w.state = WorkloadState::Replicating;
  w.ready_at = now + config_.replicate_delay;
  w.speculative = speculative;
  log(w, WorkloadState::Replicating, now);
  workloads_.push_back(std::move(w));
  return workloads_.back();
}

void Awdc::bind(int replica_id, Micros now) {
  Workload& replica = mutable_workload(replica_id);
  if (replica.state == WorkloadState::Retired)
    throw Error(ErrorCode::PreconditionViolation, "cannot bind a retired workload");
  if (now < replica.ready_at)
    throw Error(ErrorCode::PreconditionViolation, "replica is still transferring context");
  if (replica.state != WorkloadState::Active) {
    replica.state = WorkloadState::Active;
    replica.activated_at = now;
    replica.retire_at.reset();
    log(replica, WorkloadState::Active, now);
  }
  const Workload bound = replica;
  for (auto& w : workloads_) {
    if (w.workload_id == bound.workload_id || w.app_sid != bound.app_sid ||
        w.ue_scope != bound.ue_scope || w.state != WorkloadState::Active)
      continue;
    w.state = WorkloadState::Retired;
    log(w, WorkloadState::Retired, now);
  }
}

void Awdc::retire(int workload_id, Micros now) {
  Workload& w = mutable_workload(workload_id);
  if (w.state == WorkloadState::Retired) return;
  w.state = WorkloadState::Retired;
  w.retire_at.reset();
  log(w, WorkloadState::Retired, now);
}

void Awdc::mark_mispredicted(int workload_id, Micros now) {
  Workload& w = mutable_workload(workload_id);
  if (w.state != WorkloadState::Retired) w.retire_at = now + config_.grace;
}

std::optional<std::string> Awdc::ec_in_edc(const std::string& edc_id) const {
  const auto* edc = topology_->find_edc(edc_id);
  if (!edc) throw Error(ErrorCode::UnknownEdc, edc_id);
  std::optional<std::string> best;
  for (const auto& e : edc->elements)
    if (e.element_type == ElementType::EC && (!best || e.element_id < *best)) best = e.element_id;
  return best;
}

const Workload* Awdc::live(const SegmentId& app_sid,
                           const std::optional<std::string>& ue_scope) const {
  const Workload* found = nullptr;
  for (const auto& w : workloads_) {
    if (w.app_sid != app_sid || w.ue_scope != ue_scope || w.state == WorkloadState::Retired)
      continue;
    if (w.state == WorkloadState::Active) return &w;
    if (!found) found = &w;
  }
  return found;
}

const Workload* Awdc::standby(const SegmentId& app_sid, const std::optional<std::string>& ue_scope,
                              const std::string& ec) const {
  for (const auto& w : workloads_)
    if (w.app_sid == app_sid && w.ue_scope == ue_scope && w.ec_element == ec &&
        w.state == WorkloadState::Replicating)
      return &w;
  return nullptr;
}

const Workload& Awdc::replicate_reactive(const UeSession& session, const Bearer& bearer,
                                         const std::string& target_edc, Micros now) {
  auto ec = ec_in_edc(target_edc);
  if (!ec) throw Error(ErrorCode::NoEcInTargetEdc, target_edc + " has no edge compute");
  const Workload* source = live(bearer_app(bearer), session.ue_id);
  if (!source) source = &activate(bearer_app(bearer), bearer.ec_element, session.ue_id, now);
  return replicate(source->workload_id, *ec, now, false);
}

std::optional<int> Awdc::replicate_predictive(const UeSession& session, const Bearer& bearer,
                                              const Prediction& prediction, Micros now) {
  if (prediction.confidence < config_.predict_threshold) return std::nullopt;
  auto ec = ec_in_edc(prediction.edc);
  if (!ec || *ec == bearer.ec_element) return std::nullopt;
  const Workload* source = live(bearer_app(bearer), session.ue_id);
  if (!source) return std::nullopt;
  return replicate(source->workload_id, *ec, now, true).workload_id;
}

std::string Awdc::resolve_shared_app(const OerRequest& request) const {
  if (!request.required_app_sid)
    throw Error(ErrorCode::PreconditionViolation, "request carries no application SID");
  return resolve_app_host(*registry_, *topology_, *request.required_app_sid, request.cu_id);
}

std::vector<LedgerEntry> Awdc::ledger() const {
  auto out = ledger_;
  std::stable_sort(out.begin(), out.end(),
                   [](const LedgerEntry& a, const LedgerEntry& b) { return a.time < b.time; });
  return out;
}

std::string Awdc::export_ledger() const {
  std::string out;
  for (const auto& e : ledger()) {
    out += json_line(e.time, {{"app_sid", to_string(e.app_sid)},
                              {"ue_scope", e.ue_scope ? *e.ue_scope : std::string("shared")},
                              {"ec", e.ec},
                              {"state", to_string(e.state)}});
    out += '\n';
  }
  return out;
}

}  // namespace wonder
