#include "wonder/simulator.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "wonder/error.hpp"

namespace wonder {

using nlohmann::ordered_json;

Journey carry(const Topology& topology, const SidRegistry& registry, const UeSession& session,
              Packet packet, Micros now) {
  const Bearer& bearer = session.bearer(packet.bearer_id);
  const bool ul = packet.direction == Direction::UL;
  const std::string& ingress = ul ? session.serving_cu : bearer.ec_element;
  const std::string& egress = ul ? bearer.ec_element : session.serving_cu;
  packet.install(ul ? bearer.stacks.ul_cu : bearer.stacks.dl_ec);

  Journey j{forward(topology, registry, packet, ingress, now), std::move(packet)};
  if (j.outcome.status != ForwardingStatus::Delivered) return j;
  if (j.outcome.at_element != session.serving_upf) {
    j.packet.hop_trace.back().event += ",drop:misrouted";
    j.outcome = {ForwardingStatus::Dropped, j.outcome.at_element, "misrouted", j.outcome.at_time};
    return j;
  }
  Packet switched = upf_switch(j.packet, session.serving_upf, session);
  const Micros at = j.outcome.at_time;
  j.outcome = forward(topology, registry, switched, session.serving_upf, at);
  j.packet = std::move(switched);
  if (j.outcome.status == ForwardingStatus::Delivered && j.outcome.at_element != egress) {
    j.packet.hop_trace.back().event += ",drop:misrouted";
    j.outcome = {ForwardingStatus::Dropped, j.outcome.at_element, "misrouted", j.outcome.at_time};
  }
  return j;
}

EchoResult echo(const Topology& topology, const SidRegistry& registry, const UeSession& session,
                int bearer_id, Micros t, Micros air_rtt) {
  const Bearer& bearer = session.bearer(bearer_id);
  Packet request;
  request.direction = Direction::UL;
  request.qfi = bearer.qfi;
  request.bearer_id = bearer_id;
  request.ue_id = session.ue_id;
  request.payload_tag = "echo-request";
  request.created_at = t;

  EchoResult r;
  auto up = carry(topology, registry, session, std::move(request), t);
  r.request = std::move(up.packet);
  if (up.outcome.status != ForwardingStatus::Delivered) {
    r.reason = up.outcome.reason.value_or("dropped");
    return r;
  }
  Packet reply;
  reply.direction = Direction::DL;
  reply.qfi = bearer.qfi;
  reply.bearer_id = bearer_id;
  reply.ue_id = session.ue_id;
  reply.payload_tag = "echo-reply";
  reply.created_at = up.outcome.at_time;
  auto down = carry(topology, registry, session, std::move(reply), up.outcome.at_time);
  r.reply = std::move(down.packet);
  if (down.outcome.status != ForwardingStatus::Delivered) {
    r.reason = down.outcome.reason.value_or("dropped");
    return r;
  }
  r.delivered = true;
  r.rtt = air_rtt + (down.outcome.at_time - t);
  return r;
}

int inter_edc_hops(const Topology& topology, const std::vector<Hop>& trace) {
  int n = 0;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i].via_link.empty() || trace[i].element_id == trace[i - 1].element_id) continue;
    const Link* l = topology.find_link(trace[i].via_link);
    if (l && topology.is_inter_edc(*l)) ++n;
  }
  return n;
}

bool has_upf_to_upf_hop(const Topology& topology, const std::vector<Hop>& trace) {
  auto is_upf = [&](const std::string& id) {
    const auto* e = topology.find_element(id);
    return e && e->element_type == ElementType::UPF;
  };
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (trace[i].element_id != trace[i - 1].element_id && is_upf(trace[i].element_id) &&
        is_upf(trace[i - 1].element_id))
      return true;
  return false;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

int RunMetrics::dropped_total() const {
  int n = 0;
  for (const auto& [_, c] : dropped) n += c;
  return n;
}

ordered_json metrics_to_json(const RunMetrics& m) {
  ordered_json out;
  ordered_json dropped = ordered_json::object();
  for (const auto& [reason, n] : m.dropped) dropped[reason] = n;
  out["packets"] = {{"injected", m.injected},     {"delivered", m.delivered},
                    {"dropped", dropped},         {"in_flight", m.in_flight},
                    {"unexpected_drops", m.unexpected_drops}};
  ordered_json rtts = ordered_json::object();
  for (const auto& [cls, list] : m.per_class_rtt) {
    ordered_json arr = ordered_json::array();
    for (auto v : list) arr.push_back(format_ms(v));
    rtts[std::to_string(cls)] = arr;
  }
  out["per_class_rtt_ms"] = rtts;

  ordered_json hos = ordered_json::array();
  for (const auto& h : m.handovers) {
    ordered_json j = {{"ue", h.ue},
                      {"source_cu", h.source_cu},
                      {"target_cu", h.target_cu},
                      {"trigger_ms", format_ms(h.trigger)},
                      {"failed", h.failed}};
    if (h.failed) {
      j["error"] = h.error;
    } else {
      j["interruption_ms"] = format_ms(h.interruption);
      j["old_upf"] = h.old_upf;
      j["new_upf"] = h.new_upf;
      j["ue_ip_before"] = h.ip_before;
      j["ue_ip_after"] = h.ip_after;
      j["bearer_ecs"] = h.bearer_ecs;
      j["dl_buffered"] = h.dl_buffered;
      j["dl_lost"] = h.dl_lost;
      j["first_ul_inter_edc_hops"] =
          h.first_ul_inter_edc_hops ? ordered_json(*h.first_ul_inter_edc_hops) : ordered_json();
      j["prediction_hits"] = h.prediction_hits;
      j["mispredicted"] = h.mispredicted;
    }
    hos.push_back(j);
  }
  out["handovers"] = hos;

  ordered_json vio = ordered_json::array();
  for (const auto& v : m.violations)
    vio.push_back({{"ue", v.ue},
                   {"bearer", v.bearer_id},
                   {"class", v.class_id},
                   {"measured_ms", format_ms(v.measured)},
                   {"bound_ms", format_ms(v.bound)},
                   {"reason", v.reason}});
  out["violations"] = vio;
  out["prediction"] = {{"hits", m.prediction_hits}, {"misses", m.prediction_misses}};

  ordered_json probes = ordered_json::array();
  for (const auto& p : m.probes) {
    ordered_json j = {{"t_ms", format_ms(p.time)}, {"label", p.label}, {"ue", p.ue},
                      {"qfi", p.qfi},              {"class", p.class_id}, {"delivered", p.delivered}};
    if (p.delivered)
      j["rtt_ms"] = format_ms(p.rtt);
    else
      j["reason"] = p.reason;
    probes.push_back(j);
  }
  out["probes"] = probes;

  ordered_json failures = ordered_json::array();
  for (const auto& f : m.failures)
    failures.push_back({{"t_ms", format_ms(f.time)},
                        {"event", f.event},
                        {"ue", f.ue},
                        {"label", f.label},
                        {"error", f.error},
                        {"expected", f.expected}});
  out["failures"] = failures;
  out["unexpected_outcomes"] = m.unexpected_outcomes;
  return out;
}

std::string format_metrics_table(const RunMetrics& m) {
  std::ostringstream out;
  out << "packets   injected=" << m.injected << " delivered=" << m.delivered
      << " dropped=" << m.dropped_total() << " in_flight=" << m.in_flight
      << " unexpected_drops=" << m.unexpected_drops << '\n';
  for (const auto& [reason, n] : m.dropped) out << "  drop " << reason << ": " << n << '\n';
  for (const auto& [cls, list] : m.per_class_rtt) {
    if (list.empty()) continue;
    const auto [lo, hi] = std::minmax_element(list.begin(), list.end());
    out << "class " << cls << "   probes=" << list.size() << " min_rtt=" << format_ms(*lo)
        << " max_rtt=" << format_ms(*hi) << " ms\n";
  }
  for (const auto& h : m.handovers) {
    out << "handover  " << h.ue << ' ' << h.source_cu << " -> " << h.target_cu;
    if (h.failed) {
      out << " FAILED " << h.error << '\n';
      continue;
    }
    out << " interruption=" << format_ms(h.interruption) << " ms upf " << h.old_upf << " -> "
        << h.new_upf << " ip " << (h.ip_before == h.ip_after ? "stable" : "changed")
        << " dl_lost=" << h.dl_lost << '\n';
  }
  out << "prediction hits=" << m.prediction_hits << " misses=" << m.prediction_misses << '\n';
  for (const auto& v : m.violations)
    out << "VIOLATION " << v.ue << " bearer " << v.bearer_id << " class " << v.class_id << ' '
        << format_ms(v.measured) << " > " << format_ms(v.bound) << " ms (" << v.reason << ")\n";
  for (const auto& f : m.failures)
    out << (f.expected ? "expected  " : "FAILURE   ") << format_ms(f.time) << ' ' << f.event << ' '
        << f.ue << ": " << f.error << '\n';
  out << "violations=" << m.violations.size() << " unexpected_outcomes=" << m.unexpected_outcomes
      << '\n';
  return out.str();
}

int exit_code(const RunMetrics& m) {
  return m.violations.empty() && m.unexpected_drops == 0 && m.unexpected_outcomes == 0 ? 0 : 1;
}

namespace {

ControlPlaneConfig plane_config(const Scenario& sc) {
  ControlPlaneConfig c;
  c.signaling_step = sc.defaults.signaling_step;
  c.awr_mode = sc.defaults.awr_mode;
  c.awr_policy = sc.defaults.awr_policy;
  c.ho_buffer_limit = sc.defaults.ho_buffer_limit;
  c.predict_horizon = sc.defaults.predict_horizon;
  c.qfi_map = sc.qfi_map;
  return c;
}

AwdcConfig awdc_config(const Scenario& sc) {
  AwdcConfig c;
  c.activate_delay = sc.defaults.activate;
  c.replicate_delay = sc.defaults.replicate;
  c.slots_per_ec = sc.defaults.ec_slots;
  c.predict_threshold = sc.defaults.predict_threshold;
  c.grace = sc.defaults.grace;
  return c;
}

std::string trace_block(const PacketRecord& p) {
  std::string out = "# packet " + std::to_string(p.packet_id) + ' ' + p.ue + ' ' +
                    to_string(p.direction) + ' ' + p.tag + '\n';
  return out + export_hop_trace(p.trace);
}

}  // namespace

Simulator::Simulator(Scenario scenario, std::optional<std::uint64_t> seed)
    : scenario_(std::move(scenario)),
      seed_(seed.value_or(scenario_.seed)),
      rng_(seed_),
      topology_(scenario_.topology),
      registry_(SidRegistry::from_topology(topology_)),
      catalog_(scenario_.catalog),
      oerc_(ControllerInputs{&topology_, &registry_, &catalog_, scenario_.defaults.air_rtt}),
      awdc_(&topology_, &registry_, awdc_config(scenario_)),
      mcp_(oerc_, awdc_, log_, plane_config(scenario_)) {}

void Simulator::schedule(Pending p) {
  p.seq = next_seq_++;
  queue_.push_back(std::move(p));
  std::push_heap(queue_.begin(), queue_.end(), std::greater<>());
}

Micros Simulator::jitter() {
  const auto span = scenario_.defaults.jitter.count();
  if (span <= 0) return Micros{0};
  return Micros{static_cast<Micros::rep>(rng_() % static_cast<std::uint64_t>(span + 1))};
}

RunResult Simulator::run() {
  for (std::size_t i = 0; i < scenario_.events.size(); ++i) {
    Pending p;
    p.time = scenario_.events[i].time;
    p.scenario_index = static_cast<int>(i);
    schedule(p);
  }
  while (!queue_.empty()) {
    std::pop_heap(queue_.begin(), queue_.end(), std::greater<>());
    Pending p = std::move(queue_.back());
    queue_.pop_back();
    now_ = p.time;
    dispatch(p);
  }

  for (const auto& p : packets_) {
    ++metrics_.injected;
    if (p.status == ForwardingStatus::Delivered) {
      ++metrics_.delivered;
    } else if (p.status == ForwardingStatus::Dropped) {
      ++metrics_.dropped[p.reason];
      if (!p.expected_drop) ++metrics_.unexpected_drops;
    } else {
      ++metrics_.in_flight;
    }
  }

  RunResult r;
  r.signaling_jsonl = log_.export_jsonl();
  for (const auto& p : packets_) r.hop_traces_tsv += trace_block(p);
  r.workloads_jsonl = awdc_.export_ledger();
  r.paths_json = oerc_.database().dump_json(registry_);
  r.signaling_digest = hex64(fnv1a64(r.signaling_jsonl));
  r.traces_digest = hex64(fnv1a64(r.hop_traces_tsv));

  ordered_json doc;
  doc["scenario"] = scenario_.name;
  doc["seed"] = seed_;
  const ordered_json body_fields = metrics_to_json(metrics_);
  for (const auto& [k, v] : body_fields.items()) doc[k] = v;
  doc["digests"] = {{"signaling", r.signaling_digest}, {"hop_traces", r.traces_digest}};
  const std::string body = doc.dump(2);
  r.metrics_digest = hex64(fnv1a64(body));
  doc["digests"]["metrics"] = r.metrics_digest;
  r.metrics_json = doc.dump(2) + '\n';
  r.metrics = metrics_;
  r.exit_code = exit_code(metrics_);
  return r;
}

void Simulator::dispatch(const Pending& p) {
  if (p.scenario_index >= 0) {
    const ScenarioEvent& ev = scenario_.events[p.scenario_index];
    if (p.internal == Internal::Inject)
      on_send(ev, p.time, p.inject_index);
    else
      on_scenario_event(ev, p.time);
    return;
  }
  switch (p.internal) {
    case Internal::WindowOpen:
      if (mcp_.pending(p.ue)) mcp_.open_window(p.ue, p.time);
      break;
    case Internal::HandoverComplete:
      on_handover_complete(p.ue, p.time);
      break;
    case Internal::RestorationComplete:
      topology_ = restore(topology_, p.link);
      oerc_.rebuild();
      break;
    case Internal::WorkloadRetire: {
      const Workload& w = awdc_.workload(p.workload);
      if (w.state != WorkloadState::Retired && w.retire_at && *w.retire_at == p.time)
        awdc_.retire(p.workload, p.time);
      break;
    }
    case Internal::None:
    case Internal::Inject:
      break;
  }
}

void Simulator::note_failure(const ScenarioEvent& ev, Micros now, const std::string& error) {
  const bool expected = ev.expect == Expect::Fail;
  if (!expected) ++metrics_.unexpected_outcomes;
  metrics_.failures.push_back({now, to_string(ev.kind), ev.ue, ev.label, error, expected});
}

void Simulator::note_success(const ScenarioEvent& ev) {
  if (ev.expect == Expect::Fail) ++metrics_.unexpected_outcomes;
}

void Simulator::on_scenario_event(const ScenarioEvent& ev, Micros now) {
  switch (ev.kind) {
    case EventKind::Attach:
      on_attach(ev, now);
      break;
    case EventKind::Echo:
      on_echo(ev, now);
      break;
    case EventKind::Send:
      for (int i = 0; i < ev.count; ++i) {
        Pending p;
        p.time = now + i * ev.interval;
        p.scenario_index = static_cast<int>(&ev - scenario_.events.data());
        p.internal = Internal::Inject;
        p.inject_index = i;
        if (i == 0)
          on_send(ev, now, 0);
        else
          schedule(p);
      }
      break;
    case EventKind::MobilitySample:
      try {
        mcp_.on_mobility_sample(ev.sample, now);
        note_success(ev);
      } catch (const Error& e) {
        note_failure(ev, now, std::string(to_string(e.code())) + ": " + e.what());
      }
      break;
    case EventKind::MeasurementReport:
      on_measurement_report(ev, now);
      break;
    case EventKind::LinkFail:
      on_link_fail(ev, now);
      break;
    case EventKind::LinkRestore:
      repair_link(topology_, ev.link);
      oerc_.rebuild();
      note_success(ev);
      break;
    case EventKind::RegisterElement:
      on_register_element(ev, now);
      break;
  }
}

void Simulator::on_attach(const ScenarioEvent& ev, Micros now) {
  try {
    const UeSession& s = mcp_.attach(ev.ue, ev.cu, ev.bearers, now);
    for (const auto& b : s.bearers)
      if (b.violating) check_bound(s.ue_id, b, Micros{0}, "attach");
    note_success(ev);
  } catch (const Error& e) {
    note_failure(ev, now, e.what());
  }
}

int Simulator::new_packet(const std::string& ue, Direction dir, const std::string& tag,
                          const Bearer& bearer, Micros now, bool expect_drop) {
  PacketRecord r;
  r.packet_id = static_cast<int>(packets_.size()) + 1;
  r.ue = ue;
  r.direction = dir;
  r.tag = tag;
  r.bearer_id = bearer.bearer_id;
  r.class_id = bearer.class_id;
  r.injected_at = now;
  r.expected_drop = expect_drop;
  packets_.push_back(std::move(r));
  return packets_.back().packet_id;
}

void Simulator::settle(int packet_id, const Packet& packet, ForwardingStatus status,
                       const std::string& reason) {
  PacketRecord& r = packets_[packet_id - 1];
  r.trace = packet.hop_trace;
  r.status = status;
  r.reason = reason;
}

void Simulator::observe_ul(const std::string& ue, const std::vector<Hop>& trace) {
  auto it = awaiting_ul_.find(ue);
  if (it == awaiting_ul_.end()) return;
  metrics_.handovers[it->second].first_ul_inter_edc_hops = inter_edc_hops(topology_, trace);
  awaiting_ul_.erase(it);
}

void Simulator::check_bound(const std::string& ue, const Bearer& bearer, Micros measured,
                            const std::string& reason) {
  const TrafficClass& tc = catalog_.catalog_lookup(bearer.class_id);
  if (bearer.violating || measured > tc.latency_bound_rtt)
    metrics_.violations.push_back(
        {ue, bearer.bearer_id, bearer.class_id, measured, tc.latency_bound_rtt,
         bearer.violating ? "best-effort path (" + reason + ")" : reason});
}

void Simulator::on_echo(const ScenarioEvent& ev, Micros now) {
  const UeSession* s = mcp_.find_session(ev.ue);
  if (!s) {
    note_failure(ev, now, "UnknownSession: " + ev.ue);
    return;
  }
  const Bearer* bearer = nullptr;
  for (const auto& b : s->bearers)
    if (b.qfi == ev.qfi) bearer = &b;
  if (!bearer) {
    note_failure(ev, now, "UnboundQfi: qfi " + std::to_string(ev.qfi));
    return;
  }
  const Micros t = now + jitter();
  const bool expect_drop = ev.expect == Expect::Dropped;
  const std::string tag = ev.label.empty() ? "echo" : ev.label;

  ProbeRecord probe;
  probe.time = t;
  probe.label = ev.label;
  probe.ue = ev.ue;
  probe.qfi = ev.qfi;
  probe.class_id = bearer->class_id;
  probe.request_packet = new_packet(ev.ue, Direction::UL, tag, *bearer, t, expect_drop);

  if (s->state != SessionState::Active) {
    Packet p;
    p.hop_trace.push_back({s->serving_cu, t, std::nullopt, "drop:ul-suspended", ""});
    settle(probe.request_packet, p, ForwardingStatus::Dropped, "ul-suspended");
    probe.reason = "ul-suspended";
  } else {
    EchoResult r = echo(topology_, registry_, *s, bearer->bearer_id, t, scenario_.defaults.air_rtt);
    const bool up_ok = r.reply.has_value();
    settle(probe.request_packet, r.request,
           up_ok ? ForwardingStatus::Delivered : ForwardingStatus::Dropped, up_ok ? "" : r.reason);
    if (up_ok) {
      observe_ul(ev.ue, r.request.hop_trace);
      probe.reply_packet = new_packet(ev.ue, Direction::DL, tag, *bearer,
                                      r.request.hop_trace.back().arrival, expect_drop);
      settle(*probe.reply_packet, *r.reply,
             r.delivered ? ForwardingStatus::Delivered : ForwardingStatus::Dropped,
             r.delivered ? "" : r.reason);
    }
    probe.delivered = r.delivered;
    probe.rtt = r.rtt;
    probe.reason = r.reason;
    if (r.delivered) {
      metrics_.per_class_rtt[bearer->class_id].push_back(r.rtt);
      check_bound(ev.ue, *bearer, r.rtt, "probe " + tag);
    }
  }
  if (ev.expect == Expect::Delivered && !probe.delivered) ++metrics_.unexpected_outcomes;
  if (ev.expect == Expect::Dropped && probe.delivered) ++metrics_.unexpected_outcomes;
  metrics_.probes.push_back(std::move(probe));
}

void Simulator::on_send(const ScenarioEvent& ev, Micros now, int index) {
  const UeSession* s = mcp_.find_session(ev.ue);
  if (!s) {
    if (index == 0) note_failure(ev, now, "UnknownSession: " + ev.ue);
    return;
  }
  const Bearer* bearer = nullptr;
  for (const auto& b : s->bearers)
    if (b.qfi == ev.qfi) bearer = &b;
  if (!bearer) {
    if (index == 0) note_failure(ev, now, "UnboundQfi: qfi " + std::to_string(ev.qfi));
    return;
  }
  const Micros t = now + jitter();
  const bool expect_drop = ev.expect == Expect::Dropped;
  std::string tag = ev.label.empty() ? "send" : ev.label;
  if (ev.count > 1) tag += "#" + std::to_string(index);
  const int id = new_packet(ev.ue, ev.direction, tag, *bearer, t, expect_drop);

  Packet packet;
  packet.packet_id = id;
  packet.direction = ev.direction;
  packet.qfi = bearer->qfi;
  packet.bearer_id = bearer->bearer_id;
  packet.ue_id = ev.ue;
  packet.payload_tag = tag;
  packet.created_at = t;

  bool delivered = false;
  if (ev.direction == Direction::UL) {
    if (s->state != SessionState::Active) {
      packet.hop_trace.push_back({s->serving_cu, t, std::nullopt, "drop:ul-suspended", ""});
      settle(id, packet, ForwardingStatus::Dropped, "ul-suspended");
    } else {
      auto j = carry(topology_, registry_, *s, std::move(packet), t);
      delivered = j.outcome.status == ForwardingStatus::Delivered;
      settle(id, j.packet, j.outcome.status, j.outcome.reason.value_or(""));
      if (delivered) observe_ul(ev.ue, j.packet.hop_trace);
    }
  } else {
    const bool window = s->state == SessionState::HandingOver;
    auto j = carry(topology_, registry_, *s, std::move(packet), t);
    if (j.outcome.status != ForwardingStatus::Delivered) {
      settle(id, j.packet, j.outcome.status, j.outcome.reason.value_or(""));
      if (window) window_dl_[ev.ue].push_back(id);
    } else if (!window) {
      delivered = true;
      settle(id, j.packet, ForwardingStatus::Delivered, "");
    } else {
      j.packet.hop_trace.back().event += ",xn-buffer";
      window_dl_[ev.ue].push_back(id);
      PacketRecord& rec = packets_[id - 1];
      rec.trace = j.packet.hop_trace;
      if (!mcp_.buffer_dl(ev.ue, std::move(j.packet))) {
        rec.trace.back().event += ",drop:ho-buffer";
        rec.status = ForwardingStatus::Dropped;
        rec.reason = "ho-buffer";
      }
      delivered = true;
    }
  }
  if (index == 0 && ev.expect == Expect::Dropped && delivered) ++metrics_.unexpected_outcomes;
}

void Simulator::on_measurement_report(const ScenarioEvent& ev, Micros now) {
  const UeSession* s = mcp_.find_session(ev.ue);
  const std::string source = s ? s->serving_cu : "";
  try {
    const std::string ip = s ? s->ue_ip : "";
    const HandoverPlan& plan = mcp_.begin_handover(ev.ue, ev.target_cu, now);
    ip_before_[ev.ue] = ip;
    window_dl_[ev.ue].clear();
    Pending open;
    open.time = plan.window_start;
    open.internal = Internal::WindowOpen;
    open.ue = ev.ue;
    schedule(open);
    Pending done;
    done.time = plan.completion;
    done.internal = Internal::HandoverComplete;
    done.ue = ev.ue;
    schedule(done);
    note_success(ev);
  } catch (const Error& e) {
    HandoverRecord h;
    h.ue = ev.ue;
    h.source_cu = source;
    h.target_cu = ev.target_cu;
    h.trigger = now;
    h.failed = true;
    h.error = e.what();
    metrics_.handovers.push_back(std::move(h));
    note_failure(ev, now, e.what());
  }
}

void Simulator::on_handover_complete(const std::string& ue, Micros now) {
  const HandoverPlan plan = *mcp_.pending(ue);
  std::vector<Packet> released = mcp_.complete_handover(ue, now);
  const UeSession& s = mcp_.session(ue);

  for (auto& packet : released) {
    packet.install(xn_stack(registry_, plan.event.target_cu));
    auto outcome = forward(topology_, registry_, packet, plan.event.source_cu, now);
    settle(packet.packet_id, packet, outcome.status, outcome.reason.value_or(""));
  }

  const HandoverPlan* done = mcp_.last_handover(ue);
  HandoverRecord h;
  h.ue = ue;
  h.source_cu = plan.event.source_cu;
  h.target_cu = plan.event.target_cu;
  h.trigger = plan.event.trigger_time;
  h.interruption = plan.interruption();
  h.old_upf = plan.old_upf;
  h.new_upf = plan.new_upf;
  h.ip_before = ip_before_[ue];
  h.ip_after = s.ue_ip;
  for (const auto& b : s.bearers) h.bearer_ecs.push_back(b.ec_element);
  for (int id : window_dl_[ue]) {
    const PacketRecord& p = packets_[id - 1];
    ++h.dl_buffered;
    if (p.status == ForwardingStatus::Dropped) ++h.dl_lost;
  }
  window_dl_.erase(ue);
  h.prediction_hits = plan.prediction_hits;
  h.mispredicted = done ? static_cast<int>(done->mispredicted.size()) : 0;
  metrics_.prediction_hits += h.prediction_hits;
  metrics_.prediction_misses += h.mispredicted;
  awaiting_ul_[ue] = metrics_.handovers.size();
  metrics_.handovers.push_back(std::move(h));

  for (const auto& b : s.bearers)
    if (b.violating) check_bound(ue, b, Micros{0}, "handover");
  if (done) schedule_retirements(done->mispredicted);
}

void Simulator::schedule_retirements(const std::vector<int>& workloads) {
  for (int id : workloads) {
    const Workload& w = awdc_.workload(id);
    if (!w.retire_at) continue;
    auto it = retire_scheduled_.find(id);
    if (it != retire_scheduled_.end() && it->second == *w.retire_at) continue;
    retire_scheduled_[id] = *w.retire_at;
    Pending p;
    p.time = *w.retire_at;
    p.internal = Internal::WorkloadRetire;
    p.workload = id;
    schedule(p);
  }
}

void Simulator::on_link_fail(const ScenarioEvent& ev, Micros now) {
  const bool switching = fail_link(topology_, ev.link);
  if (switching) {
    Micros restoration = scenario_.defaults.restoration.value_or(
        catalog_.min_restoration().value_or(Micros{50000}));
    Pending p;
    p.time = now + restoration;
    p.internal = Internal::RestorationComplete;
    p.link = ev.link;
    schedule(p);
  }
  oerc_.rebuild();
  note_success(ev);
}

void Simulator::on_register_element(const ScenarioEvent& ev, Micros now) {
  try {
    if (topology_.find_element(ev.element.element_id))
      throw Error(ErrorCode::PreconditionViolation, ev.element.element_id + " already exists");
    registry_.register_element(ev.element);
    for (auto& edc : topology_.edcs)
      if (edc.edc_id == ev.element.edc_id) edc.elements.push_back(ev.element);
    oerc_.rebuild();
    note_success(ev);
  } catch (const Error& e) {
    note_failure(ev, now, std::string(to_string(e.code())) + ": " + e.what());
  }
}

}  // namespace wonder
