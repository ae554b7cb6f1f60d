#include "wonder/sr_dataplane.hpp"

#include <sstream>

#include "wonder/error.hpp"
#include "wonder/routing.hpp"

namespace wonder {

const char* to_string(Direction d) { return d == Direction::UL ? "UL" : "DL"; }

const char* to_string(ForwardingStatus s) {
  switch (s) {
    case ForwardingStatus::InFlight: return "InFlight";
    case ForwardingStatus::Delivered: return "Delivered";
    case ForwardingStatus::Dropped: return "Dropped";
  }
  return "?";
}

const SegmentId* Packet::active_segment() const {
  if (segments_left == 0 || segments_left > segment_list.size()) return nullptr;
  return &segment_list[segment_list.size() - segments_left];
}

void Packet::install(SegmentList stack) {
  segment_list = std::move(stack);
  segments_left = segment_list.size();
}

namespace {

void note(Hop& hop, std::string_view event) {
  if (!hop.event.empty()) hop.event += ',';
  hop.event += event;
}

ForwardingOutcome drop(Packet& packet, const std::string& at, Micros now, std::string reason) {
  note(packet.hop_trace.back(), "drop:" + reason);
  return {ForwardingStatus::Dropped, at, std::move(reason), now};
}

}  // namespace

ForwardingOutcome forward(const Topology& topology, const SidRegistry& registry, Packet& packet,
                          std::string_view current_element, Micros now) {
  if (packet.encapsulation_depth != 0)
    throw Error(ErrorCode::NestedEncapsulation,
                "packet for " + packet.ue_id + " carries a tunnel header");
  if (!topology.find_element(current_element))
    throw Error(ErrorCode::UnknownElement, std::string(current_element));

  std::string at(current_element);
  if (packet.hop_trace.empty() || packet.hop_trace.back().element_id != at) {
    const auto* active = packet.active_segment();
    packet.hop_trace.push_back(
        {at, now, active ? std::optional(*active) : std::nullopt, "inject", ""});
  }

  const Graph graph = forwarding_graph(topology);
  while (packet.segments_left > 0) {
    const SegmentId active = *packet.active_segment();
    std::string target;
    try {
      target = resolve_sid(registry, topology, active, at);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::UnknownSid) return drop(packet, at, now, "unknown sid");
      if (e.code() == ErrorCode::NoLiveInstance) return drop(packet, at, now, "unreachable");
      throw;
    }

    if (target != at) {
      auto route = shortest_route(graph, at, target);
      if (!route) return drop(packet, at, now, "unreachable");
      for (std::size_t i = 0; i < route->links.size(); ++i) {
        const int link = route->links[i];
        std::string via;
        Micros delay = topology.intra_edc_delay;
        if (link >= 0) {
          const auto& l = topology.links[link];
          if (l.restoring) return drop(packet, route->nodes[i], now, "restoration");
          via = l.link_id;
          delay = l.delay;
        }
        now += delay;
        packet.hop_trace.push_back({route->nodes[i + 1], now, active, "transit", via});
      }
      at = target;
    }
    --packet.segments_left;
    packet.hop_trace.back().event =
        packet.hop_trace.back().event == "transit" ? "" : packet.hop_trace.back().event;
    note(packet.hop_trace.back(), packet.segments_left == 0 ? "deliver" : "segment");
  }
  return {ForwardingStatus::Delivered, at, std::nullopt, now};
}

Packet upf_switch(const Packet& packet, std::string_view upf_element, const UeSession& session) {
  if (session.serving_upf != upf_element)
    throw Error(ErrorCode::WrongUpf, session.ue_id + " is anchored at " + session.serving_upf +
                                         ", not " + std::string(upf_element));
  if (packet.encapsulation_depth != 0)
    throw Error(ErrorCode::NestedEncapsulation, "tunnelled packet at " + std::string(upf_element));
  const Bearer& bearer = session.bearer(packet.bearer_id);
  Packet out = packet;
  out.install(packet.direction == Direction::UL ? bearer.stacks.ul_upf : bearer.stacks.dl_upf);
  if (!out.hop_trace.empty()) note(out.hop_trace.back(), "upf-switch");
  return out;
}

bool fail_link(Topology& topology, std::string_view link_id) {
  Link* link = topology.find_link(link_id);
  if (!link) throw Error(ErrorCode::UnknownElement, "link " + std::string(link_id));
  if (!link->admin_up) return link->restoring;
  link->admin_up = false;
  const Link* backup = topology.backup_for(link_id);
  link->restoring = link->is_protected && backup && !backup->admin_up;
  return link->restoring;
}

Topology restore(Topology topology, std::string_view failed_link_id) {
  Link* link = topology.find_link(failed_link_id);
  if (!link) throw Error(ErrorCode::UnknownElement, "link " + std::string(failed_link_id));
  if (link->admin_up || !link->is_protected) return topology;
  const Link* backup_view = topology.backup_for(failed_link_id);
  if (!backup_view)
    throw Error(ErrorCode::NoBackup, "protected link " + link->link_id + " has no backup");
  Link* backup = topology.find_link(backup_view->link_id);
  link->restoring = false;
  backup->admin_up = true;
  return topology;
}

void repair_link(Topology& topology, std::string_view link_id) {
  Link* link = topology.find_link(link_id);
  if (!link) throw Error(ErrorCode::UnknownElement, "link " + std::string(link_id));
  link->admin_up = true;
  link->restoring = false;
  if (const Link* b = topology.backup_for(link_id)) topology.find_link(b->link_id)->admin_up = false;
}

std::string export_hop_trace(const std::vector<Hop>& trace) {
  std::ostringstream out;
  for (const auto& hop : trace) {
    out << format_ms(hop.arrival) << '\t' << hop.element_id << '\t'
        << (hop.active_sid ? to_string(*hop.active_sid) : "-") << '\t'
        << (hop.event.empty() ? "transit" : hop.event) << '\n';
  }
  return out.str();
}

Micros trace_delay(const Topology& topology, const std::vector<Hop>& trace) {
  Micros total{0};
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i].element_id == trace[i - 1].element_id) continue;
    if (trace[i].via_link.empty()) {
      total += topology.intra_edc_delay;
    } else {
      const Link* link = topology.find_link(trace[i].via_link);
      if (!link) throw Error(ErrorCode::UnknownElement, "link " + trace[i].via_link);
      total += link->delay;
    }
  }
  return total;
}

}  // namespace wonder
