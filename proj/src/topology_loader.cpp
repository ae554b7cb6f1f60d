#include "wonder/topology_loader.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "wonder/error.hpp"
#include "wonder/routing.hpp"

namespace wonder {

using nlohmann::json;

void ConfigReader::problem(const std::string& path, const std::string& message) {
  problems_.push_back(path + ": " + message);
}

void ConfigReader::check_keys(const json& obj, const std::string& path,
                              std::initializer_list<std::string_view> allowed) {
  if (lax_ || !obj.is_object()) return;
  for (const auto& [key, _] : obj.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      problem(path + "." + key, "unknown key");
}

bool ConfigReader::is_object(const json& value, const std::string& path) {
  if (value.is_object()) return true;
  problem(path, "expected an object");
  return false;
}

bool ConfigReader::is_array(const json& value, const std::string& path) {
  if (value.is_array()) return true;
  problem(path, "expected an array");
  return false;
}

namespace {

const json* field(ConfigReader& r, const json& obj, const std::string& path, const char* key,
                  bool required) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) r.problem(path + "." + key, "required");
    return nullptr;
  }
  return &*it;
}

}  // namespace

std::optional<std::string> ConfigReader::string(const json& obj, const std::string& path,
                                                const char* key, bool required) {
  const json* v = field(*this, obj, path, key, required);
  if (!v) return std::nullopt;
  if (!v->is_string()) {
    problem(path + "." + key, "expected a string");
    return std::nullopt;
  }
  return v->get<std::string>();
}

std::optional<double> ConfigReader::number(const json& obj, const std::string& path,
                                           const char* key, bool required) {
  const json* v = field(*this, obj, path, key, required);
  if (!v) return std::nullopt;
  if (!v->is_number()) {
    problem(path + "." + key, "expected a number");
    return std::nullopt;
  }
  return v->get<double>();
}

std::optional<long long> ConfigReader::integer(const json& obj, const std::string& path,
                                               const char* key, bool required) {
  const json* v = field(*this, obj, path, key, required);
  if (!v) return std::nullopt;
  if (!v->is_number_integer()) {
    problem(path + "." + key, "expected an integer");
    return std::nullopt;
  }
  return v->get<long long>();
}

std::optional<bool> ConfigReader::boolean(const json& obj, const std::string& path,
                                          const char* key, bool required) {
  const json* v = field(*this, obj, path, key, required);
  if (!v) return std::nullopt;
  if (!v->is_boolean()) {
    problem(path + "." + key, "expected a boolean");
    return std::nullopt;
  }
  return v->get<bool>();
}

std::optional<std::uint32_t> parse_srv6_prefix(std::string_view text) {
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    if (text.substr(slash + 1) != "32") return std::nullopt;
    text = text.substr(0, slash);
  }
  if (text.size() >= 2 && text.substr(text.size() - 2) == "::") text.remove_suffix(2);
  std::uint32_t tag = 0;
  int groups = 0;
  while (!text.empty()) {
    auto colon = text.find(':');
    auto group = text.substr(0, colon);
    if (group.empty() || group.size() > 4 || groups == 2) return std::nullopt;
    std::uint32_t v = 0;
    for (char c : group) {
      v <<= 4;
      if (c >= '0' && c <= '9') v |= c - '0';
      else if (c >= 'a' && c <= 'f') v |= c - 'a' + 10;
      else if (c >= 'A' && c <= 'F') v |= c - 'A' + 10;
      else return std::nullopt;
    }
    tag |= v << (16 * (1 - groups));
    ++groups;
    text = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  }
  if (groups == 0) return std::nullopt;
  return tag;
}

namespace {

std::optional<SegmentId> read_sid(ConfigReader& r, const json& obj, const std::string& path,
                                  const char* value_key, const char* kind_key, SidKind fallback,
                                  bool required) {
  auto value = r.integer(obj, path, value_key, required);
  auto kind_text = r.string(obj, path, kind_key, false);
  SidKind kind = fallback;
  if (kind_text) {
    auto parsed = parse_sid_kind(*kind_text);
    if (!parsed) {
      r.problem(path + "." + kind_key, "unknown SID kind '" + *kind_text + "'");
      return std::nullopt;
    }
    kind = *parsed;
  }
  if (!value) return std::nullopt;
  if (*value < 0 || *value > 0xFFFFFFFFLL) {
    r.problem(path + "." + value_key, "must fit in 32 bits");
    return std::nullopt;
  }
  return SegmentId{static_cast<std::uint32_t>(*value), kind};
}

}  // namespace

Topology read_topology(const json& node, const std::string& path, ConfigReader& r) {
  Topology topo;
  if (!r.is_object(node, path)) return topo;
  r.check_keys(node, path,
               {"format_version", "intra_edc_delay_ms", "srv6_prefix", "edcs", "links", "sids"});

  if (auto d = r.number(node, path, "intra_edc_delay_ms", false)) {
    if (*d < 0)
      r.problem(path + ".intra_edc_delay_ms", "must be >= 0");
    else
      topo.intra_edc_delay = from_ms(*d);
  }
  if (auto p = r.string(node, path, "srv6_prefix", false)) {
    if (auto tag = parse_srv6_prefix(*p))
      topo.srv6_prefix_tag = *tag;
    else
      r.problem(path + ".srv6_prefix", "expected a /32 prefix such as fd00::/32");
  }

  int router_ordinal = 0;
  if (const json* edcs = field(r, node, path, "edcs", true); edcs && r.is_array(*edcs, path + ".edcs")) {
    for (std::size_t i = 0; i < edcs->size(); ++i) {
      const std::string ep = path + ".edcs[" + std::to_string(i) + "]";
      const json& e = (*edcs)[i];
      if (!r.is_object(e, ep)) continue;
      r.check_keys(e, ep, {"id", "elements"});
      EdcRecord edc;
      edc.edc_id = r.string(e, ep, "id", true).value_or("");
      const json* elements = field(r, e, ep, "elements", true);
      if (!elements || !r.is_array(*elements, ep + ".elements")) {
        topo.edcs.push_back(std::move(edc));
        continue;
      }
      int ordinal = 0;
      for (std::size_t k = 0; k < elements->size(); ++k) {
        const std::string xp = ep + ".elements[" + std::to_string(k) + "]";
        const json& x = (*elements)[k];
        if (!r.is_object(x, xp)) continue;
        r.check_keys(x, xp, {"id", "type", "sid", "sid_kind", "provider", "apps"});
        ElementRecord rec;
        rec.element_id = r.string(x, xp, "id", true).value_or("");
        rec.edc_id = edc.edc_id;
        rec.provider_id = r.string(x, xp, "provider", false).value_or("default");
        if (auto t = r.string(x, xp, "type", true)) {
          if (auto parsed = parse_element_type(*t))
            rec.element_type = *parsed;
          else
            r.problem(xp + ".type", "unknown element type '" + *t + "'");
        }
        const bool router = rec.element_type == ElementType::FabricRouter;
        auto sid = read_sid(r, x, xp, "sid", "sid_kind", SidKind::Node, false);
        if (sid)
          rec.sid = *sid;
        else if (router)
          rec.sid = SegmentId::node(100 + static_cast<std::uint32_t>(router_ordinal));
        else
          rec.sid = default_node_sid(static_cast<int>(i) + 1, ordinal);
        router ? ++router_ordinal : ++ordinal;
        if (const json* apps = field(r, x, xp, "apps", false); apps && r.is_array(*apps, xp + ".apps")) {
          for (std::size_t a = 0; a < apps->size(); ++a) {
            const std::string ap = xp + ".apps[" + std::to_string(a) + "]";
            if (!r.is_object((*apps)[a], ap)) continue;
            r.check_keys((*apps)[a], ap, {"sid", "kind"});
            if (auto s = read_sid(r, (*apps)[a], ap, "sid", "kind", SidKind::App, true))
              rec.app_ids.push_back(*s);
          }
        }
        if (!rec.app_ids.empty() && rec.element_type != ElementType::EC)
          r.problem(xp + ".apps", "only EC elements host applications");
        edc.elements.push_back(std::move(rec));
      }
      topo.edcs.push_back(std::move(edc));
    }
  }

  if (const json* links = field(r, node, path, "links", false); links && r.is_array(*links, path + ".links")) {
    for (std::size_t i = 0; i < links->size(); ++i) {
      const std::string lp = path + ".links[" + std::to_string(i) + "]";
      const json& l = (*links)[i];
      if (!r.is_object(l, lp)) continue;
      r.check_keys(l, lp, {"id", "from", "to", "delay_ms", "capacity_gbps", "protected",
                           "backup_of", "admin_up", "error_rate"});
      Link link;
      link.link_id = r.string(l, lp, "id", true).value_or("");
      link.from = r.string(l, lp, "from", true).value_or("");
      link.to = r.string(l, lp, "to", true).value_or("");
      if (auto d = r.number(l, lp, "delay_ms", true)) {
        if (*d < 0) r.problem(lp + ".delay_ms", "must be >= 0 (link " + link.link_id + ")");
        link.delay = from_ms(*d);
      }
      link.capacity_gbps = r.number(l, lp, "capacity_gbps", false).value_or(100.0);
      link.is_protected = r.boolean(l, lp, "protected", false).value_or(false);
      link.backup_of = r.string(l, lp, "backup_of", false);
      link.admin_up = r.boolean(l, lp, "admin_up", false).value_or(!link.backup_of.has_value());
      link.error_rate = r.number(l, lp, "error_rate", false).value_or(0.0);
      topo.links.push_back(std::move(link));
    }
  }

  if (const json* sids = field(r, node, path, "sids", false); sids && r.is_array(*sids, path + ".sids")) {
    for (std::size_t i = 0; i < sids->size(); ++i) {
      const std::string sp = path + ".sids[" + std::to_string(i) + "]";
      const json& s = (*sids)[i];
      if (!r.is_object(s, sp)) continue;
      r.check_keys(s, sp, {"element", "sid", "kind"});
      auto element = r.string(s, sp, "element", true);
      auto sid = read_sid(r, s, sp, "sid", "kind", SidKind::App, true);
      if (!element || !sid) continue;
      bool found = false;
      for (auto& edc : topo.edcs)
        for (auto& e : edc.elements)
          if (e.element_id == *element) {
            e.app_ids.push_back(*sid);
            found = true;
          }
      if (!found) r.problem(sp + ".element", "unknown element '" + *element + "'");
    }
  }

  for (auto& p : validate_topology(topo, path)) r.add(std::move(p));
  return topo;
}

std::vector<std::string> validate_topology(const Topology& topo, const std::string& path) {
  std::vector<std::string> problems;
  auto report = [&](const std::string& where, const std::string& what) {
    problems.push_back(where + ": " + what);
  };

  if (topo.edcs.empty()) report(path + ".edcs", "a MECD needs at least one EDC");
  if (!std::any_of(topo.edcs.begin(), topo.edcs.end(), [](const EdcRecord& e) { return e.has_ec(); }))
    report(path + ".edcs", "at least one EDC must be equipped with an EC");
  if (topo.intra_edc_delay < Micros{0}) report(path + ".intra_edc_delay_ms", "must be >= 0");

  std::set<std::string> edc_ids;
  std::set<std::string> element_ids;
  std::map<SegmentId, std::string> sid_owner;
  for (std::size_t i = 0; i < topo.edcs.size(); ++i) {
    const auto& edc = topo.edcs[i];
    const std::string ep = path + ".edcs[" + std::to_string(i) + "]";
    if (edc.edc_id.empty()) report(ep + ".id", "must not be empty");
    if (!edc_ids.insert(edc.edc_id).second) report(ep + ".id", "duplicate EDC '" + edc.edc_id + "'");
    for (std::size_t k = 0; k < edc.elements.size(); ++k) {
      const auto& e = edc.elements[k];
      const std::string xp = ep + ".elements[" + std::to_string(k) + "]";
      if (e.element_id.empty()) report(xp + ".id", "must not be empty");
      if (!element_ids.insert(e.element_id).second)
        report(xp + ".id", "duplicate element_id '" + e.element_id + "'");
      std::vector<SegmentId> sids{e.sid};
      sids.insert(sids.end(), e.app_ids.begin(), e.app_ids.end());
      for (const auto& sid : sids) {
        if (sid.kind == SidKind::Anycast) continue;
        auto [it, fresh] = sid_owner.emplace(sid, e.element_id);
        if (!fresh && it->second != e.element_id)
          report(xp, "SID " + to_string(sid) + " already bound to '" + it->second + "'");
      }
    }
  }

  std::set<std::string> link_ids;
  for (std::size_t i = 0; i < topo.links.size(); ++i) {
    const auto& l = topo.links[i];
    const std::string lp = path + ".links[" + std::to_string(i) + "]";
    const std::string name = " (link " + l.link_id + ")";
    if (l.link_id.empty()) report(lp + ".id", "must not be empty");
    if (!link_ids.insert(l.link_id).second) report(lp + ".id", "duplicate link '" + l.link_id + "'");
    if (!element_ids.count(l.from)) report(lp + ".from", "unknown element '" + l.from + "'" + name);
    if (!element_ids.count(l.to)) report(lp + ".to", "unknown element '" + l.to + "'" + name);
    if (l.from == l.to) report(lp, "self-loop" + name);
    if (l.delay < Micros{0}) report(lp + ".delay_ms", "must be >= 0" + name);
    if (!(l.capacity_gbps > 0)) report(lp + ".capacity_gbps", "must be > 0" + name);
    if (l.error_rate < 0 || l.error_rate > 1) report(lp + ".error_rate", "must lie in [0, 1]" + name);
    if (l.backup_of) {
      const Link* primary = topo.find_link(*l.backup_of);
      if (!primary)
        report(lp + ".backup_of", "unknown primary '" + *l.backup_of + "'" + name);
      else if (!primary->connects(l.from, l.to))
        report(lp + ".backup_of", "backup must join the primary's endpoints" + name);
      else if (primary->backup_of)
        report(lp + ".backup_of", "a backup cannot protect another backup" + name);
      if (l.is_protected) report(lp + ".protected", "backup links are not themselves protected" + name);
    } else if (l.is_protected && !topo.backup_for(l.link_id)) {
      report(lp + ".protected", "NoBackup: protected link has no backup" + name);
    }
  }

  if (problems.empty() && !element_ids.empty()) {
    const Graph graph = admin_up_graph(topo);
    std::vector<bool> seen(graph.size(), false);
    std::vector<int> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (const auto& e : graph.edges(u))
        if (!seen[e.to]) {
          seen[e.to] = true;
          stack.push_back(e.to);
        }
    }
    for (int i = 0; i < graph.size(); ++i)
      if (!seen[i]) report(path, "element '" + graph.id(i) + "' is disconnected over admin_up links");
  }
  return problems;
}

Topology load_topology(std::string_view config_text, bool lax) {
  json doc;
  try {
    doc = json::parse(config_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  ConfigReader reader(lax);
  if (reader.is_object(doc, "$")) {
    auto version = reader.integer(doc, "$", "format_version", true);
    if (version && *version != 1) reader.problem("$.format_version", "must be 1");
  }
  Topology topo = read_topology(doc, "$", reader);
  if (!reader.problems().empty()) throw ValidationError(reader.problems());
  return topo;
}

}  // namespace wonder
