#include "wonder/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "wonder/error.hpp"
#include "wonder/topology_loader.hpp"

namespace wonder {

using nlohmann::json;

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Attach: return "attach";
    case EventKind::Echo: return "echo";
    case EventKind::Send: return "send";
    case EventKind::MobilitySample: return "mobility_sample";
    case EventKind::MeasurementReport: return "measurement_report";
    case EventKind::LinkFail: return "link_fail";
    case EventKind::LinkRestore: return "link_restore";
    case EventKind::RegisterElement: return "register_element";
  }
  return "?";
}

namespace {

std::optional<EventKind> parse_event_kind(std::string_view text) {
  for (auto k : {EventKind::Attach, EventKind::Echo, EventKind::Send, EventKind::MobilitySample,
                 EventKind::MeasurementReport, EventKind::LinkFail, EventKind::LinkRestore,
                 EventKind::RegisterElement})
    if (text == to_string(k)) return k;
  return std::nullopt;
}

std::optional<Micros> read_ms(ConfigReader& r, const json& obj, const std::string& path,
                              const char* key, bool required, bool positive = false) {
  auto v = r.number(obj, path, key, required);
  if (!v) return std::nullopt;
  if (*v < 0 || (positive && *v == 0)) {
    r.problem(path + "." + key, positive ? "must be > 0" : "must be >= 0");
    return std::nullopt;
  }
  return from_ms(*v);
}

std::optional<SegmentId> read_app_sid(ConfigReader& r, const json& obj, const std::string& path,
                                      const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  const std::string p = path + "." + key;
  if (!r.is_object(*it, p)) return std::nullopt;
  r.check_keys(*it, p, {"sid", "kind"});
  auto value = r.integer(*it, p, "sid", true);
  auto kind_text = r.string(*it, p, "kind", false).value_or("app");
  auto kind = parse_sid_kind(kind_text);
  if (!kind || (*kind != SidKind::App && *kind != SidKind::Anycast)) {
    r.problem(p + ".kind", "must be app or anycast");
    return std::nullopt;
  }
  if (!value || *value < 0 || *value > 0xFFFFFFFFLL) return std::nullopt;
  return SegmentId{static_cast<std::uint32_t>(*value), *kind};
}

ScenarioDefaults read_defaults(ConfigReader& r, const json& node, const std::string& path) {
  ScenarioDefaults d;
  if (!r.is_object(node, path)) return d;
  r.check_keys(node, path,
               {"air_rtt_ms", "intra_edc_hop_ms", "signaling_step_ms", "activate_ms", "replicate_ms",
                "predict_threshold", "predict_horizon_ms", "awr_mode", "awr_policy",
                "ho_buffer_limit", "grace_ms", "ec_slots", "restoration_ms", "jitter_ms"});
  if (auto v = read_ms(r, node, path, "air_rtt_ms", false)) d.air_rtt = *v;
  if (auto v = read_ms(r, node, path, "signaling_step_ms", false, true)) d.signaling_step = *v;
  if (auto v = read_ms(r, node, path, "activate_ms", false)) d.activate = *v;
  if (auto v = read_ms(r, node, path, "replicate_ms", false)) d.replicate = *v;
  if (auto v = read_ms(r, node, path, "predict_horizon_ms", false)) d.predict_horizon = *v;
  if (auto v = read_ms(r, node, path, "grace_ms", false)) d.grace = *v;
  if (auto v = read_ms(r, node, path, "restoration_ms", false, true)) d.restoration = *v;
  if (auto v = read_ms(r, node, path, "jitter_ms", false)) d.jitter = *v;
  if (auto v = r.number(node, path, "predict_threshold", false)) {
    if (*v < 0 || *v > 1)
      r.problem(path + ".predict_threshold", "must lie in [0, 1]");
    else
      d.predict_threshold = *v;
  }
  if (auto v = r.string(node, path, "awr_mode", false)) {
    if (auto m = parse_awr_mode(*v))
      d.awr_mode = *m;
    else
      r.problem(path + ".awr_mode", "expected off, reactive or predictive");
  }
  if (auto v = r.string(node, path, "awr_policy", false)) {
    if (auto p = parse_awr_policy(*v))
      d.awr_policy = *p;
    else
      r.problem(path + ".awr_policy", "expected lazy or eager");
  }
  if (auto v = r.integer(node, path, "ho_buffer_limit", false)) {
    if (*v < 0)
      r.problem(path + ".ho_buffer_limit", "must be >= 0");
    else
      d.ho_buffer_limit = static_cast<std::size_t>(*v);
  }
  if (auto v = r.integer(node, path, "ec_slots", false)) {
    if (*v <= 0)
      r.problem(path + ".ec_slots", "must be > 0");
    else
      d.ec_slots = static_cast<int>(*v);
  }
  return d;
}

std::optional<TrafficClass> read_class(ConfigReader& r, const json& node, const std::string& path) {
  if (!r.is_object(node, path)) return std::nullopt;
  r.check_keys(node, path,
               {"class_id", "name", "latency_bound_rtt_ms", "peak_rate_gbps", "resiliency",
                "restoration_ms", "max_error_rate", "qos", "required_app_sid"});
  TrafficClass tc;
  auto id = r.integer(node, path, "class_id", true);
  auto bound = r.number(node, path, "latency_bound_rtt_ms", true);
  auto rate = r.number(node, path, "peak_rate_gbps", true);
  auto resiliency = r.string(node, path, "resiliency", false).value_or("unprotected");
  if (!id || !bound || !rate) return std::nullopt;
  tc.class_id = static_cast<int>(*id);
  tc.latency_bound_rtt = from_ms(*bound);
  tc.peak_rate_gbps = *rate;
  tc.max_error_rate = r.number(node, path, "max_error_rate", false).value_or(1.0);
  if (resiliency == "protected") {
    auto restoration = r.number(node, path, "restoration_ms", true);
    tc.restoration = from_ms(restoration.value_or(50.0));
  } else if (resiliency != "unprotected") {
    r.problem(path + ".resiliency", "expected protected or unprotected");
  } else if (node.contains("restoration_ms")) {
    r.problem(path + ".restoration_ms", "only protected classes restore");
  }
  if (auto q = node.find("qos"); q != node.end()) {
    const std::string qp = path + ".qos";
    if (r.is_object(*q, qp)) {
      r.check_keys(*q, qp, {"qfi", "mpls_exp", "ipv6_flow_label"});
      if (auto v = r.integer(*q, qp, "qfi", false)) tc.qos.qfi = static_cast<int>(*v);
      if (auto v = r.integer(*q, qp, "mpls_exp", false)) {
        if (*v < 0 || *v > 7)
          r.problem(qp + ".mpls_exp", "must fit in 3 bits");
        else
          tc.qos.mpls_exp = static_cast<std::uint8_t>(*v);
      }
      if (auto v = r.integer(*q, qp, "ipv6_flow_label", false)) {
        if (*v < 0 || *v > 0xFFFFF)
          r.problem(qp + ".ipv6_flow_label", "must fit in 20 bits");
        else
          tc.qos.ipv6_flow_label = static_cast<std::uint32_t>(*v);
      }
    }
  }
  tc.required_app_sid = read_app_sid(r, node, path, "required_app_sid");
  for (auto& p : validate(tc)) r.problem(path, p);
  return tc;
}

std::optional<ElementRecord> read_element(ConfigReader& r, const json& node,
                                          const std::string& path) {
  if (!r.is_object(node, path)) return std::nullopt;
  r.check_keys(node, path, {"id", "type", "sid", "sid_kind", "provider", "apps"});
  ElementRecord rec;
  auto id = r.string(node, path, "id", true);
  auto type = r.string(node, path, "type", true);
  auto sid = r.integer(node, path, "sid", true);
  if (!id || !type || !sid) return std::nullopt;
  rec.element_id = *id;
  auto parsed = parse_element_type(*type);
  if (!parsed) {
    r.problem(path + ".type", "unknown element type '" + *type + "'");
    return std::nullopt;
  }
  rec.element_type = *parsed;
  auto kind = parse_sid_kind(r.string(node, path, "sid_kind", false).value_or("node"));
  if (!kind) {
    r.problem(path + ".sid_kind", "unknown SID kind");
    return std::nullopt;
  }
  rec.sid = {static_cast<std::uint32_t>(*sid), *kind};
  rec.provider_id = r.string(node, path, "provider", false).value_or("default");
  if (auto apps = node.find("apps"); apps != node.end() && r.is_array(*apps, path + ".apps")) {
    for (std::size_t i = 0; i < apps->size(); ++i) {
      json wrapper = {{"app", (*apps)[i]}};
      if (auto a = read_app_sid(r, wrapper, path + ".apps[" + std::to_string(i) + "]", "app"))
        rec.app_ids.push_back(*a);
    }
  }
  return rec;
}

Expect read_expect(ConfigReader& r, const json& node, const std::string& path) {
  auto v = r.string(node, path, "expect", false);
  if (!v) return Expect::Unset;
  if (*v == "delivered") return Expect::Delivered;
  if (*v == "dropped") return Expect::Dropped;
  if (*v == "fail") return Expect::Fail;
  if (*v == "ok") return Expect::Unset;
  r.problem(path + ".expect", "expected delivered, dropped, fail or ok");
  return Expect::Unset;
}

std::optional<ScenarioEvent> read_event(ConfigReader& r, const json& node, const std::string& path) {
  if (!r.is_object(node, path)) return std::nullopt;
  ScenarioEvent ev;
  auto t = read_ms(r, node, path, "t_ms", true);
  auto kind_text = r.string(node, path, "kind", true);
  if (!t || !kind_text) return std::nullopt;
  auto kind = parse_event_kind(*kind_text);
  if (!kind) {
    r.problem(path + ".kind", "unknown event kind '" + *kind_text + "'");
    return std::nullopt;
  }
  ev.time = *t;
  ev.kind = *kind;
  ev.label = r.string(node, path, "label", false).value_or("");
  ev.expect = read_expect(r, node, path);

  switch (ev.kind) {
    case EventKind::Attach: {
      r.check_keys(node, path, {"t_ms", "kind", "label", "expect", "ue", "cu", "bearers"});
      ev.ue = r.string(node, path, "ue", true).value_or("");
      ev.cu = r.string(node, path, "cu", true).value_or("");
      auto bearers = node.find("bearers");
      if (bearers == node.end()) {
        r.problem(path + ".bearers", "required");
      } else if (r.is_array(*bearers, path + ".bearers")) {
        if (bearers->empty()) r.problem(path + ".bearers", "must not be empty");
        for (std::size_t i = 0; i < bearers->size(); ++i) {
          const std::string bp = path + ".bearers[" + std::to_string(i) + "]";
          const json& b = (*bearers)[i];
          if (!r.is_object(b, bp)) continue;
          r.check_keys(b, bp, {"qfi", "class_id", "app"});
          BearerSpec spec;
          spec.qfi = static_cast<int>(r.integer(b, bp, "qfi", true).value_or(0));
          if (auto c = r.integer(b, bp, "class_id", false)) spec.class_id = static_cast<int>(*c);
          spec.app_sid = read_app_sid(r, b, bp, "app");
          ev.bearers.push_back(spec);
        }
      }
      break;
    }
    case EventKind::Echo:
      r.check_keys(node, path, {"t_ms", "kind", "label", "expect", "ue", "qfi"});
      ev.ue = r.string(node, path, "ue", true).value_or("");
      ev.qfi = static_cast<int>(r.integer(node, path, "qfi", true).value_or(0));
      break;
    case EventKind::Send: {
      r.check_keys(node, path,
                   {"t_ms", "kind", "label", "expect", "ue", "qfi", "direction", "count", "interval_ms"});
      ev.ue = r.string(node, path, "ue", true).value_or("");
      ev.qfi = static_cast<int>(r.integer(node, path, "qfi", true).value_or(0));
      auto dir = r.string(node, path, "direction", false).value_or("DL");
      if (dir == "UL")
        ev.direction = Direction::UL;
      else if (dir == "DL")
        ev.direction = Direction::DL;
      else
        r.problem(path + ".direction", "expected UL or DL");
      ev.count = static_cast<int>(r.integer(node, path, "count", false).value_or(1));
      if (ev.count < 1) r.problem(path + ".count", "must be >= 1");
      ev.interval = read_ms(r, node, path, "interval_ms", false).value_or(Micros{0});
      break;
    }
    case EventKind::MobilitySample:
      r.check_keys(node, path,
                   {"t_ms", "kind", "label", "expect", "ue", "edc", "hint", "neighbor_edc"});
      ev.ue = r.string(node, path, "ue", true).value_or("");
      ev.sample.ue_id = ev.ue;
      ev.sample.time = ev.time;
      ev.sample.current_edc = r.string(node, path, "edc", true).value_or("");
      ev.sample.radio_signal_hint = r.number(node, path, "hint", false);
      ev.sample.neighbor_edc = r.string(node, path, "neighbor_edc", false);
      break;
    case EventKind::MeasurementReport:
      r.check_keys(node, path, {"t_ms", "kind", "label", "expect", "ue", "target_cu"});
      ev.ue = r.string(node, path, "ue", true).value_or("");
      ev.target_cu = r.string(node, path, "target_cu", true).value_or("");
      break;
    case EventKind::LinkFail:
    case EventKind::LinkRestore:
      r.check_keys(node, path, {"t_ms", "kind", "label", "expect", "link"});
      ev.link = r.string(node, path, "link", true).value_or("");
      break;
    case EventKind::RegisterElement: {
      r.check_keys(node, path, {"t_ms", "kind", "label", "expect", "edc", "element"});
      auto edc = r.string(node, path, "edc", true);
      auto el = node.find("element");
      if (el == node.end()) {
        r.problem(path + ".element", "required");
      } else if (auto rec = read_element(r, *el, path + ".element")) {
        ev.element = *rec;
      }
      ev.element.edc_id = edc.value_or("");
      break;
    }
  }
  return ev;
}

void check_references(ConfigReader& r, const Scenario& sc, const std::vector<std::string>& paths) {
  std::set<std::string> elements;
  std::set<std::string> cus;
  for (const auto* e : sc.topology.elements()) {
    elements.insert(e->element_id);
    if (e->element_type == ElementType::CU) cus.insert(e->element_id);
  }
  std::set<std::string> edcs;
  for (const auto& e : sc.topology.edcs) edcs.insert(e.edc_id);

  std::set<std::string> attached;
  std::set<int> qfis;
  for (const auto& [q, _] : sc.qfi_map) qfis.insert(q);
  for (std::size_t i = 0; i < sc.events.size(); ++i) {
    const auto& ev = sc.events[i];
    const std::string& path = paths[i];
    switch (ev.kind) {
      case EventKind::Attach:
        if (!cus.count(ev.cu)) r.problem(path + ".cu", "unknown CU '" + ev.cu + "'");
        for (std::size_t b = 0; b < ev.bearers.size(); ++b) {
          const auto& spec = ev.bearers[b];
          const std::string bp = path + ".bearers[" + std::to_string(b) + "]";
          if (spec.class_id && !sc.catalog.contains(*spec.class_id))
            r.problem(bp + ".class_id", "unknown class " + std::to_string(*spec.class_id));
          if (!spec.class_id && !qfis.count(spec.qfi))
            r.problem(bp + ".qfi", "qfi " + std::to_string(spec.qfi) + " maps to no class");
        }
        attached.insert(ev.ue);
        break;
      case EventKind::Echo:
      case EventKind::Send:
      case EventKind::MeasurementReport:
        if (!attached.count(ev.ue))
          r.problem(path + ".ue", "'" + ev.ue + "' is not attached by an earlier event");
        if (ev.kind == EventKind::MeasurementReport && !cus.count(ev.target_cu))
          r.problem(path + ".target_cu", "unknown CU '" + ev.target_cu + "'");
        break;
      case EventKind::MobilitySample:
        if (!edcs.count(ev.sample.current_edc))
          r.problem(path + ".edc", "unknown EDC '" + ev.sample.current_edc + "'");
        if (ev.sample.neighbor_edc && !edcs.count(*ev.sample.neighbor_edc))
          r.problem(path + ".neighbor_edc", "unknown EDC '" + *ev.sample.neighbor_edc + "'");
        break;
      case EventKind::LinkFail:
      case EventKind::LinkRestore:
        if (!sc.topology.find_link(ev.link))
          r.problem(path + ".link", "unknown link '" + ev.link + "'");
        break;
      case EventKind::RegisterElement:
        if (!edcs.count(ev.element.edc_id))
          r.problem(path + ".edc", "UnknownEdc '" + ev.element.edc_id + "'");
        if (ev.element.element_type == ElementType::CU) cus.insert(ev.element.element_id);
        break;
    }
  }
}

}  // namespace

Scenario load_scenario(std::string_view text, bool lax) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  ConfigReader r(lax);
  Scenario sc;
  if (!r.is_object(doc, "$")) throw ValidationError(r.problems());
  r.check_keys(doc, "$",
               {"format_version", "name", "description", "seed", "defaults", "topology", "classes",
                "apps", "qfi_map", "events"});
  auto version = r.integer(doc, "$", "format_version", true);
  if (version && *version != 1) r.problem("$.format_version", "must be 1");
  sc.name = r.string(doc, "$", "name", false).value_or("");
  r.string(doc, "$", "description", false);
  if (auto seed = r.integer(doc, "$", "seed", false)) sc.seed = static_cast<std::uint64_t>(*seed);
  if (auto d = doc.find("defaults"); d != doc.end()) sc.defaults = read_defaults(r, *d, "$.defaults");

  if (auto t = doc.find("topology"); t != doc.end()) {
    sc.topology = read_topology(*t, "$.topology", r);
    const json* hop = nullptr;
    if (auto d = doc.find("defaults"); d != doc.end() && d->is_object() && d->contains("intra_edc_hop_ms"))
      hop = &(*d)["intra_edc_hop_ms"];
    if (hop && hop->is_number() && !t->contains("intra_edc_delay_ms"))
      sc.topology.intra_edc_delay = from_ms(hop->get<double>());
  } else {
    r.problem("$.topology", "required");
  }

  if (auto apps = doc.find("apps"); apps != doc.end() && r.is_array(*apps, "$.apps")) {
    for (std::size_t i = 0; i < apps->size(); ++i) {
      const std::string ap = "$.apps[" + std::to_string(i) + "]";
      const json& a = (*apps)[i];
      if (!r.is_object(a, ap)) continue;
      r.check_keys(a, ap, {"sid", "kind", "hosts", "name"});
      json wrapper = {{"app", json{{"sid", a.value("sid", json())}, {"kind", a.value("kind", "app")}}}};
      auto sid = read_app_sid(r, wrapper, ap, "app");
      auto hosts = a.find("hosts");
      if (hosts == a.end() || !r.is_array(*hosts, ap + ".hosts") || hosts->empty()) {
        if (hosts == a.end() || (hosts->is_array() && hosts->empty()))
          r.problem(ap + ".hosts", "needs at least one EC");
        continue;
      }
      if (!sid) continue;
      if (sid->kind == SidKind::App && hosts->size() > 1)
        r.problem(ap + ".hosts", "a non-anycast app has exactly one host");
      for (std::size_t h = 0; h < hosts->size(); ++h) {
        const std::string hp = ap + ".hosts[" + std::to_string(h) + "]";
        if (!(*hosts)[h].is_string()) {
          r.problem(hp, "expected an element id");
          continue;
        }
        const auto id = (*hosts)[h].get<std::string>();
        bool found = false;
        for (auto& edc : sc.topology.edcs)
          for (auto& e : edc.elements)
            if (e.element_id == id) {
              found = true;
              if (e.element_type != ElementType::EC)
                r.problem(hp, "'" + id + "' is not an EC");
              else if (std::find(e.app_ids.begin(), e.app_ids.end(), *sid) == e.app_ids.end())
                e.app_ids.push_back(*sid);
            }
        if (!found) r.problem(hp, "unknown element '" + id + "'");
      }
    }
    if (r.problems().empty())
      for (auto& p : validate_topology(sc.topology, "$.topology")) r.add(std::move(p));
  }

  if (auto classes = doc.find("classes"); classes != doc.end() && r.is_array(*classes, "$.classes")) {
    std::vector<TrafficClass> parsed;
    std::set<int> ids;
    for (std::size_t i = 0; i < classes->size(); ++i) {
      const std::string cp = "$.classes[" + std::to_string(i) + "]";
      if (auto tc = read_class(r, (*classes)[i], cp)) {
        if (!ids.insert(tc->class_id).second)
          r.problem(cp + ".class_id", "duplicate class " + std::to_string(tc->class_id));
        else
          parsed.push_back(*tc);
      }
    }
    if (parsed.empty()) r.problem("$.classes", "must define at least one class");
    if (r.problems().empty()) sc.catalog = TrafficCatalog(parsed);
  }

  if (auto q = doc.find("qfi_map"); q != doc.end()) {
    if (r.is_object(*q, "$.qfi_map")) {
      for (const auto& [key, value] : q->items()) {
        const std::string qp = "$.qfi_map." + key;
        int qfi = -1;
        try {
          std::size_t used = 0;
          qfi = std::stoi(key, &used);
          if (used != key.size()) qfi = -1;
        } catch (const std::exception&) {
        }
        if (qfi < 0 || qfi > 63) r.problem(qp, "key must be a QFI in 0..63");
        if (!value.is_number_integer()) {
          r.problem(qp, "expected a class id");
          continue;
        }
        if (qfi >= 0) sc.qfi_map[qfi] = value.get<int>();
      }
    }
  } else {
    for (int id : sc.catalog.class_ids()) {
      const auto& tc = sc.catalog.catalog_lookup(id);
      if (tc.qos.qfi) sc.qfi_map[*tc.qos.qfi] = id;
    }
    if (sc.qfi_map.empty()) sc.qfi_map = {{5, 0}, {9, 1}};
  }
  for (const auto& [qfi, class_id] : sc.qfi_map)
    if (!sc.catalog.contains(class_id))
      r.problem("$.qfi_map." + std::to_string(qfi), "unknown class " + std::to_string(class_id));

  std::vector<std::pair<ScenarioEvent, std::string>> read;
  if (auto events = doc.find("events"); events != doc.end() && r.is_array(*events, "$.events")) {
    for (std::size_t i = 0; i < events->size(); ++i) {
      std::string path = "$.events[" + std::to_string(i) + "]";
      if (auto ev = read_event(r, (*events)[i], path)) read.emplace_back(std::move(*ev), std::move(path));
    }
  }
  std::stable_sort(read.begin(), read.end(),
                   [](const auto& a, const auto& b) { return a.first.time < b.first.time; });
  std::vector<std::string> paths;
  for (auto& [ev, path] : read) {
    sc.events.push_back(std::move(ev));
    paths.push_back(std::move(path));
  }
  check_references(r, sc, paths);

  if (!r.problems().empty()) throw ValidationError(r.problems());
  return sc;
}

Scenario load_scenario_file(const std::string& path, bool lax) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_scenario(buf.str(), lax);
}

}  // namespace wonder
