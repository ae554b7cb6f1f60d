#include "wonder/mobile_control_plane.hpp"

#include <algorithm>
#include <cstdio>

#include "wonder/error.hpp"

namespace wonder {

const char* to_string(AwrMode mode) {
  switch (mode) {
    case AwrMode::Off: return "off";
    case AwrMode::Reactive: return "reactive";
    case AwrMode::Predictive: return "predictive";
  }
  return "?";
}

std::optional<AwrMode> parse_awr_mode(std::string_view text) {
  if (text == "off") return AwrMode::Off;
  if (text == "reactive") return AwrMode::Reactive;
  if (text == "predictive") return AwrMode::Predictive;
  return std::nullopt;
}

std::optional<AwrPolicy> parse_awr_policy(std::string_view text) {
  if (text == "lazy") return AwrPolicy::Lazy;
  if (text == "eager") return AwrPolicy::Eager;
  return std::nullopt;
}

SegmentList xn_stack(const SidRegistry& registry, const std::string& target_cu) {
  const auto* rec = registry.record(target_cu);
  if (!rec) throw Error(ErrorCode::UnknownElement, target_cu);
  return {rec->sid};
}

namespace {

std::string stack_text(const SegmentList& stack) {
  std::string out = "[";
  for (std::size_t i = 0; i < stack.size(); ++i) {
    if (i) out += ",";
    out += to_string(stack[i]);
  }
  return out + "]";
}

std::string bearer_list(const std::vector<int>& ids) {
  std::string out;
  for (int id : ids) out += (out.empty() ? "" : ",") + std::to_string(id);
  return out;
}

bool replicable(const Bearer& b) { return !b.shared_app && !b.pinned_app; }

std::string make_ip(int n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "10.45.%d.%d", n / 256, n % 256);
  return buf;
}

}  // namespace

MobileControlPlane::MobileControlPlane(OerController& oerc, Awdc& awdc, SignalingLog& log,
                                       ControlPlaneConfig config,
                                       std::unique_ptr<HandoverPredictor> predictor)
    : oerc_(oerc), awdc_(awdc), log_(log), config_(std::move(config)), predictor_(std::move(predictor)) {
  if (!predictor_)
    predictor_ = std::make_unique<TrendPredictor>(edc_adjacency(*oerc_.inputs().topology));
}

void MobileControlPlane::emit(Micros t, const std::string& step, const std::string& from,
                              const std::string& to, const std::string& ue,
                              const std::string& detail) {
  log_.emit({t, step, from, to, ue, detail});
}

const UeSession* MobileControlPlane::find_session(const std::string& ue_id) const {
  auto it = sessions_.find(ue_id);
  return it == sessions_.end() ? nullptr : &it->second;
}

const UeSession& MobileControlPlane::session(const std::string& ue_id) const {
  const auto* s = find_session(ue_id);
  if (!s) throw Error(ErrorCode::UnknownSession, ue_id);
  return *s;
}

UeSession& MobileControlPlane::mutable_session(const std::string& ue_id) {
  auto it = sessions_.find(ue_id);
  if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, ue_id);
  return it->second;
}

const HandoverPlan* MobileControlPlane::pending(const std::string& ue_id) const {
  auto it = pending_.find(ue_id);
  return it == pending_.end() ? nullptr : &it->second;
}

const HandoverPlan* MobileControlPlane::last_handover(const std::string& ue_id) const {
  auto it = completed_.find(ue_id);
  return it == completed_.end() ? nullptr : &it->second;
}

const UeSession& MobileControlPlane::attach(const std::string& ue_id, const std::string& cu_id,
                                            const std::vector<BearerSpec>& specs, Micros now) {
  if (sessions_.count(ue_id)) throw Error(ErrorCode::PreconditionViolation, ue_id + " is attached");
  const auto& in = oerc_.inputs();
  const auto* cu = in.registry->record(cu_id);
  if (!cu || cu->element_type != ElementType::CU)
    throw Error(ErrorCode::UnknownElement, cu_id + " is not a registered CU");
  if (specs.empty()) throw Error(ErrorCode::PreconditionViolation, "attach needs a bearer");

  const Micros s = config_.signaling_step;
  emit(now, "OER.1 AttachRequest", "UE", "AMF", ue_id, "cu=" + cu_id);

  SessionBindings bindings;
  std::vector<OerRequest> requests;
  std::vector<Bearer> bearers;
  std::string qos;
  try {
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const auto& spec = specs[i];
      int class_id;
      if (spec.class_id) {
        class_id = *spec.class_id;
      } else if (auto it = config_.qfi_map.find(spec.qfi); it != config_.qfi_map.end()) {
        class_id = it->second;
      } else {
        throw Error(ErrorCode::UnboundQfi, "qfi " + std::to_string(spec.qfi) + " maps to no class");
      }
      const auto& tc = in.catalog->catalog_lookup(class_id);
      Bearer b;
      b.bearer_id = static_cast<int>(i) + 1;
      b.qfi = spec.qfi;
      b.class_id = class_id;
      bindings.bind({spec.qfi, class_id, b.bearer_id});

      OerRequest req;
      req.traffic_class_id = class_id;
      req.cu_id = cu_id;
      req.qfi = spec.qfi;
      req.bearer_id = b.bearer_id;
      req.ue_id = ue_id;
      req.required_app_sid = spec.app_sid ? spec.app_sid : tc.required_app_sid;
      if (req.required_app_sid) {
        req.pinned_ec = awdc_.resolve_shared_app(req);
        b.app_sid = *req.required_app_sid;
        b.pinned_app = true;
        b.shared_app = true;
      } else {
        b.app_sid = SegmentId::app(9500 + static_cast<std::uint32_t>(class_id));
      }
      qos += (qos.empty() ? "" : " ") + std::to_string(spec.qfi) + "->" + std::to_string(class_id);
      requests.push_back(std::move(req));
      bearers.push_back(std::move(b));
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::AppNotPresent) throw;
    emit(now + s, "OER.12 AttachReject", "AMF", "UE", ue_id, e.what());
    throw Error(ErrorCode::AttachFailed, e.what());
  }

  emit(now + s, "OER.2 QosPolicy", "AMF", "PCF", ue_id, "qfi " + qos);
  emit(now + 2 * s, "OER.3 SliceSelectRequest", "AMF", "NSSF", ue_id, "cu=" + cu_id);
  for (const auto& r : requests)
    emit(now + 3 * s, "OER.4 OerRequest", "NSSF", "OERC", ue_id,
         "bearer=" + std::to_string(r.bearer_id) + " class=" + std::to_string(r.traffic_class_id) +
             " qfi=" + std::to_string(r.qfi) + " cu=" + cu_id);

  std::vector<OerResponse> responses;
  try {
    responses = oerc_.handle_session_request(requests);
  } catch (const NoFeasiblePathError& e) {
    emit(now + 4 * s, "OER.5 OerResponse", "OERC", "NSSF", ue_id,
         "NoFeasiblePath bearers=" + bearer_list(e.bearers()));
    emit(now + 5 * s, "OER.12 AttachReject", "AMF", "UE", ue_id, "NoFeasiblePath");
    throw Error(ErrorCode::AttachFailed, e.what());
  }

  for (std::size_t i = 0; i < responses.size(); ++i) {
    const auto& p = responses[i].path;
    emit(now + 4 * s, "OER.5 OerResponse", "OERC", "NSSF", ue_id,
         "bearer=" + std::to_string(bearers[i].bearer_id) + " upf=" + p.upf_element +
             " ec=" + p.ec_element + " rtt_ms=" + format_ms(p.rtt));
  }
  try {
    for (std::size_t i = 0; i < responses.size(); ++i) {
      const auto& b = bearers[i];
      const std::optional<std::string> scope =
          b.shared_app ? std::nullopt : std::optional<std::string>(ue_id);
      awdc_.activate(b.app_sid, responses[i].selected_ec, scope, now + 4 * s);
      emit(now + 4 * s, "OER.6 WorkloadActivate", "OERC", "AWDC", ue_id,
           "app=" + to_string(b.app_sid) + " ec=" + responses[i].selected_ec);
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::CapacityExceeded) throw;
    emit(now + 5 * s, "OER.12 AttachReject", "AMF", "UE", ue_id, e.what());
    throw Error(ErrorCode::AttachFailed, e.what());
  }
  for (std::size_t i = 0; i < responses.size(); ++i)
    emit(now + 4 * s, "OER.7 DlStackInstall", "OERC", "EC", ue_id,
         responses[i].selected_ec + " dl=" + stack_text(responses[i].path.stacks.dl_ec));

  UeSession session;
  session.ue_id = ue_id;
  session.ue_ip = make_ip(next_ip_++);
  session.serving_cu = cu_id;
  session.serving_upf = responses.front().selected_upf;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    bearers[i].ec_element = responses[i].selected_ec;
    bearers[i].stacks = responses[i].path.stacks;
  }
  session.bearers = std::move(bearers);
  session.state = SessionState::Active;

  emit(now + 5 * s, "OER.8 PathResponse", "NSSF", "AMF", ue_id, "upf=" + session.serving_upf);
  emit(now + 6 * s, "OER.9 SessionUpdate", "AMF", "SMF", ue_id, "upf=" + session.serving_upf);
  for (const auto& b : session.bearers)
    emit(now + 7 * s, "OER.10 UpfStackInstall", "SMF", "UPF", ue_id,
         session.serving_upf + " bearer=" + std::to_string(b.bearer_id) +
             " ul=" + stack_text(b.stacks.ul_upf) + " dl=" + stack_text(b.stacks.dl_upf));
  for (const auto& b : session.bearers)
    emit(now + 8 * s, "OER.11 UlStackInstall", "AMF", "CU", ue_id,
         cu_id + " bearer=" + std::to_string(b.bearer_id) + " ul=" + stack_text(b.stacks.ul_cu));
  emit(now + 9 * s, "OER.12 SessionActive", "AMF", "UE", ue_id, "ue_ip=" + session.ue_ip);

  ips_[ue_id].insert(session.ue_ip);
  bindings_[ue_id] = std::move(bindings);
  return sessions_[ue_id] = std::move(session);
}

std::vector<PathRecord> MobileControlPlane::repath(const UeSession& session,
                                                   const std::string& target_cu,
                                                   const std::map<int, std::string>& overrides,
                                                   const std::set<int>& violating,
                                                   std::string* upf) {
  auto ec_of = [&](const Bearer& b) {
    auto it = overrides.find(b.bearer_id);
    return it != overrides.end() ? it->second : b.ec_element;
  };
  std::vector<OerRequest> requests;
  for (const auto& b : session.bearers) {
    if (violating.count(b.bearer_id)) continue;
    OerRequest req;
    req.traffic_class_id = b.class_id;
    req.cu_id = target_cu;
    req.upf_id = session.serving_upf;
    req.qfi = b.qfi;
    req.bearer_id = b.bearer_id;
    req.ue_id = session.ue_id;
    req.pinned_ec = ec_of(b);
    requests.push_back(std::move(req));
  }
  std::map<int, PathRecord> by_bearer;
  std::optional<std::string> chosen_upf;
  if (!requests.empty()) {
    auto responses = oerc_.handle_session_request(requests);
    for (std::size_t i = 0; i < responses.size(); ++i)
      by_bearer[requests[i].bearer_id] = responses[i].path;
    chosen_upf = responses.front().selected_upf;
  }
  for (const auto& b : session.bearers) {
    if (!violating.count(b.bearer_id)) continue;
    auto rec = oerc_.best_effort_path(b.class_id, target_cu, ec_of(b), chosen_upf);
    if (!rec)
      throw Error(ErrorCode::HandoverFailed,
                  "bearer " + std::to_string(b.bearer_id) + " cannot reach " + ec_of(b));
    if (!chosen_upf) chosen_upf = rec->upf_element;
    by_bearer[b.bearer_id] = *rec;
  }
  std::vector<PathRecord> out;
  for (const auto& b : session.bearers) out.push_back(by_bearer.at(b.bearer_id));
  *upf = *chosen_upf;
  return out;
}

const HandoverPlan& MobileControlPlane::begin_handover(const std::string& ue_id,
                                                       const std::string& target_cu, Micros now) {
  UeSession& session = mutable_session(ue_id);
  if (session.state != SessionState::Active)
    throw Error(ErrorCode::PreconditionViolation, ue_id + " is not Active");
  if (pending_.count(ue_id))
    throw Error(ErrorCode::PreconditionViolation, ue_id + " is already handing over");
  const auto& in = oerc_.inputs();
  const auto* target = in.registry->record(target_cu);
  if (!target || target->element_type != ElementType::CU)
    throw Error(ErrorCode::UnknownElement, target_cu + " is not a registered CU");
  if (target_cu == session.serving_cu)
    throw Error(ErrorCode::PreconditionViolation, "handover to the serving CU " + target_cu);

  const Micros s = config_.signaling_step;
  const std::string& source_cu = session.serving_cu;
  const std::string& target_edc = target->edc_id;
  emit(now, "MER.1 MeasurementReport", "UE", "SourceCU", ue_id, source_cu + " -> " + target_cu);
  emit(now + s, "MER.2 HoRequest", "SourceCU", "TargetCU", ue_id, source_cu + " -> " + target_cu);
  emit(now + 2 * s, "MER.3 HoTrigger", "TargetCU", "SourceCU", ue_id, target_cu);
  emit(now + 3 * s, "MER.4 HoTrigger", "SourceCU", "AMF", ue_id, "attach " + target_cu);
  emit(now + 4 * s, "MER.5 UeAttach", "UE", "TargetCU", ue_id, "DL buffered at " + source_cu);
  emit(now + 5 * s, "MER.6 PathSwitchRequest", "TargetCU", "AMF", ue_id, target_cu);
  emit(now + 6 * s, "MER.7 SliceSelectRequest", "AMF", "NSSF", ue_id, "cu=" + target_cu);
  const Micros t8 = now + 7 * s;
  emit(t8, "MER.8 OerRequest", "NSSF", "OERC", ue_id, "path update from " + target_cu);

  HandoverPlan plan;
  plan.event = {ue_id, source_cu, target_cu, now};
  plan.old_upf = session.serving_upf;
  plan.window_start = now + 4 * s;

  std::map<int, std::string> overrides;
  Micros ready = t8;
  const bool awr = config_.awr_mode != AwrMode::Off;
  const auto target_ec = awdc_.ec_in_edc(target_edc);
  std::vector<int> created;

  auto relocate = [&](const Bearer& b, const Workload& w) {
    overrides[b.bearer_id] = w.ec_element;
    plan.bind_replicas[b.bearer_id] = w.workload_id;
    ready = std::max(ready, w.ready_at);
  };
  auto replicate_now = [&](const Bearer& b) {
    const Workload& w = awdc_.replicate_reactive(session, b, target_edc, t8);
    emit(t8, "AWR.1 ReplicateRequest", "OERC", "AWDC", ue_id,
         "bearer=" + std::to_string(b.bearer_id) + " app=" + to_string(b.app_sid) + " to " +
             target_edc);
    emit(t8, "AWR.2 WorkloadReplicate", "AWDC", "EC", ue_id,
         b.ec_element + " -> " + w.ec_element + " app=" + to_string(b.app_sid));
    created.push_back(w.workload_id);
    relocate(b, w);
  };

  if (awr && target_ec) {
    for (const auto& b : session.bearers) {
      if (!replicable(b)) continue;
      if (const Workload* w = awdc_.standby(b.app_sid, ue_id, *target_ec)) {
        if (w->speculative) ++plan.prediction_hits;
        emit(t8, "AWR.P3 ReplicaBind", "OERC", "AWDC", ue_id,
             "bearer=" + std::to_string(b.bearer_id) + " ec=" + w->ec_element);
        relocate(b, *w);
      } else if (config_.awr_policy == AwrPolicy::Eager &&
                 in.topology->element(b.ec_element).edc_id != target_edc) {
        replicate_now(b);
      }
    }
  }

  std::set<int> violating;
  std::vector<PathRecord> paths;
  std::string upf;
  for (std::size_t attempt = 0;; ++attempt) {
    try {
      paths = repath(session, target_cu, overrides, violating, &upf);
      break;
    } catch (const NoFeasiblePathError& e) {
      if (!awr || attempt > session.bearers.size()) {
        emit(t8 + s, "MER.9 OerResponse", "OERC", "NSSF", ue_id,
             "NoFeasiblePath bearers=" + bearer_list(e.bearers()));
        emit(t8 + 2 * s, "MER.10 HandoverCancel", "AMF", "TargetCU", ue_id, "rollback to " + source_cu);
        for (int id : created) awdc_.retire(id, t8 + 2 * s);
        throw Error(ErrorCode::HandoverFailed, e.what());
      }
      std::vector<int> failing = e.bearers();
      if (failing.empty())
        for (const auto& b : session.bearers)
          if (!violating.count(b.bearer_id)) failing.push_back(b.bearer_id);
      for (int id : failing) {
        const Bearer& b = session.bearer(id);
        if (!replicable(b) || overrides.count(id)) {
          violating.insert(id);
          continue;
        }
        try {
          replicate_now(b);
        } catch (const Error& err) {
          if (err.code() != ErrorCode::NoEcInTargetEdc && err.code() != ErrorCode::CapacityExceeded)
            throw;
          emit(t8, "AWR.1 ReplicateRequest", "OERC", "AWDC", ue_id,
               "bearer=" + std::to_string(id) + " " + to_string(err.code()));
          violating.insert(id);
        }
      }
    }
  }

  if (ready > t8)
    emit(ready, "AWR.3 ReplicaReady", "AWDC", "OERC", ue_id,
         "replicas=" + std::to_string(plan.bind_replicas.size()));
  const Micros t9 = ready + s;
  std::string detail = "upf=" + upf;
  for (std::size_t i = 0; i < paths.size(); ++i)
    detail += " b" + std::to_string(session.bearers[i].bearer_id) + "=" + paths[i].ec_element +
              (violating.count(session.bearers[i].bearer_id) ? "(violating)" : "");
  emit(t9, "MER.9 OerResponse", "OERC", "NSSF", ue_id, detail);
  emit(t9 + s, "MER.10 PathUpdate", "NSSF", "AMF", ue_id, "upf=" + upf);
  emit(t9 + 2 * s, "MER.11 PathSwitchRequest", "AMF", "SMF", ue_id, "upf=" + upf);
  emit(t9 + 3 * s, "MER.12 UpfUpdate", "SMF", "UPF", ue_id, upf);
  plan.completion = t9 + 4 * s;
  emit(plan.completion, "MER.13 UlStackUpdate", "AMF", "TargetCU", ue_id, target_cu);

  plan.new_upf = upf;
  plan.paths = std::move(paths);
  plan.violating = std::move(violating);
  return pending_[ue_id] = std::move(plan);
}

void MobileControlPlane::open_window(const std::string& ue_id, Micros) {
  if (!pending_.count(ue_id))
    throw Error(ErrorCode::PreconditionViolation, ue_id + " has no handover in progress");
  mutable_session(ue_id).state = SessionState::HandingOver;
}

std::vector<Packet> MobileControlPlane::complete_handover(const std::string& ue_id, Micros now) {
  auto it = pending_.find(ue_id);
  if (it == pending_.end())
    throw Error(ErrorCode::PreconditionViolation, ue_id + " has no handover in progress");
  HandoverPlan plan = std::move(it->second);
  pending_.erase(it);

  UeSession& session = mutable_session(ue_id);
  session.serving_cu = plan.event.target_cu;
  session.serving_upf = plan.new_upf;
  for (std::size_t i = 0; i < session.bearers.size(); ++i) {
    auto& b = session.bearers[i];
    b.stacks = plan.paths[i].stacks;
    b.ec_element = plan.paths[i].ec_element;
    b.violating = plan.violating.count(b.bearer_id) > 0;
  }
  for (const auto& [bearer, workload] : plan.bind_replicas) awdc_.bind(workload, now);

  std::set<int> bound;
  for (const auto& [_, w] : plan.bind_replicas) bound.insert(w);
  for (const auto& w : awdc_.workloads()) {
    if (w.speculative && w.ue_scope == ue_id && w.state == WorkloadState::Replicating &&
        !w.retire_at && !bound.count(w.workload_id)) {
      awdc_.mark_mispredicted(w.workload_id, now);
      plan.mispredicted.push_back(w.workload_id);
    }
  }

  for (const auto& b : session.bearers) {
    emit(now, "MER.14 UlImpose", "TargetCU", "UPF", ue_id,
         "bearer=" + std::to_string(b.bearer_id) + " ul=" + stack_text(b.stacks.ul_cu));
    emit(now, "MER.15 DlImpose", "EC", "UPF", ue_id,
         b.ec_element + " dl=" + stack_text(b.stacks.dl_ec));
  }
  session.state = SessionState::Active;
  ips_[ue_id].insert(session.ue_ip);

  std::vector<Packet> released;
  if (auto buf = dl_buffer_.find(ue_id); buf != dl_buffer_.end()) {
    released.assign(std::make_move_iterator(buf->second.begin()),
                    std::make_move_iterator(buf->second.end()));
    dl_buffer_.erase(buf);
  }
  completed_[ue_id] = std::move(plan);
  return released;
}

const UeSession& MobileControlPlane::handover(const std::string& ue_id,
                                              const std::string& target_cu, Micros now) {
  const HandoverPlan& plan = begin_handover(ue_id, target_cu, now);
  const Micros start = plan.window_start;
  const Micros end = plan.completion;
  open_window(ue_id, start);
  complete_handover(ue_id, end);
  return session(ue_id);
}

bool MobileControlPlane::buffer_dl(const std::string& ue_id, Packet packet) {
  if (session(ue_id).state != SessionState::HandingOver)
    throw Error(ErrorCode::PreconditionViolation, ue_id + " is not handing over");
  auto& buf = dl_buffer_[ue_id];
  if (config_.ho_buffer_limit && buf.size() >= *config_.ho_buffer_limit) return false;
  buf.push_back(std::move(packet));
  return true;
}

std::size_t MobileControlPlane::buffered(const std::string& ue_id) const {
  auto it = dl_buffer_.find(ue_id);
  return it == dl_buffer_.end() ? 0 : it->second.size();
}

std::vector<int> MobileControlPlane::on_mobility_sample(const MobilitySample& sample, Micros now) {
  auto& history = history_[sample.ue_id];
  history.push_back(sample);
  if (config_.awr_mode != AwrMode::Predictive || history.size() < 2) return {};
  const UeSession* s = find_session(sample.ue_id);
  if (!s || s->state != SessionState::Active || pending_.count(sample.ue_id)) return {};

  auto prediction = predictor_->predict(history, config_.predict_horizon);
  if (!prediction) return {};
  const auto& topo = *oerc_.inputs().topology;
  if (!topo.find_edc(prediction->edc) || prediction->edc == topo.element(s->serving_cu).edc_id)
    return {};
  if (prediction->confidence < awdc_.config().predict_threshold) return {};

  std::vector<int> created;
  bool announced = false;
  for (const auto& b : s->bearers) {
    if (!replicable(b)) continue;
    auto ec = awdc_.ec_in_edc(prediction->edc);
    if (!ec || awdc_.standby(b.app_sid, s->ue_id, *ec)) continue;
    if (!announced) {
      char conf[16];
      std::snprintf(conf, sizeof conf, "%.3f", prediction->confidence);
      emit(now, "AWR.P1 HandoverPrediction", "AMF", "AWDC", s->ue_id,
           "edc=" + prediction->edc + " confidence=" + conf);
      announced = true;
    }
    try {
      auto id = awdc_.replicate_predictive(*s, b, *prediction, now);
      if (!id) continue;
      created.push_back(*id);
      emit(now, "AWR.P2 WorkloadReplicate", "AWDC", "EC", s->ue_id,
           b.ec_element + " -> " + awdc_.workload(*id).ec_element + " app=" + to_string(b.app_sid));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::CapacityExceeded) throw;
      emit(now, "AWR.P2 WorkloadReplicate", "AWDC", "EC", s->ue_id, e.what());
    }
  }
  return created;
}

}  // namespace wonder
