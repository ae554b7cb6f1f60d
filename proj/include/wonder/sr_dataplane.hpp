#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wonder/mecd_model.hpp"
#include "wonder/session.hpp"
#include "wonder/time.hpp"

namespace wonder {

enum class Direction { UL, DL };

const char* to_string(Direction d);

struct Hop {
  std::string element_id;
  Micros arrival{0};
  std::optional<SegmentId> active_sid;
  std::string event;
  /// Link id used to reach this element; empty for intra-EDC hops and for
  /// entries that are not a transition.
  std::string via_link;
};

struct Packet {
  int packet_id = 0;
  Direction direction = Direction::UL;
  SegmentList segment_list;
  /// Number of segments still to be visited; the active one is
  /// segment_list[size - segments_left].
  std::size_t segments_left = 0;
  int qfi = 0;
  int bearer_id = 0;
  std::string ue_id;
  std::string payload_tag;
  std::vector<Hop> hop_trace;
  Micros created_at{0};
  /// Tunnel headers stacked outside the segment list. Always zero: the
  /// forwarding path rejects anything else.
  int encapsulation_depth = 0;

  const SegmentId* active_segment() const;
  void install(SegmentList stack);
};

enum class ForwardingStatus { InFlight, Delivered, Dropped };

const char* to_string(ForwardingStatus s);

struct ForwardingOutcome {
  ForwardingStatus status = ForwardingStatus::InFlight;
  std::string at_element;
  std::optional<std::string> reason;
  Micros at_time{0};
};

/// Moves `packet` from `current_element` (reached at time `now`) through its
/// remaining segments. Between segments the packet follows the forwarding
/// plane's minimum-delay route. Links in restoration drop the packet with
/// reason "restoration".
ForwardingOutcome forward(const Topology& topology, const SidRegistry& registry,
                          Packet& packet, std::string_view current_element, Micros now);

/// N3 <-> N6 switching at the UPF by label stack only. UL packets get the
/// bearer's N6 stack toward the EC, DL packets the N3 stack toward the CU.
Packet upf_switch(const Packet& packet, std::string_view upf_element, const UeSession& session);

/// Marks a link failed. Protected links enter restoration; returns true when a
/// backup switch-over is pending.
bool fail_link(Topology& topology, std::string_view link_id);

/// Completes protection switching for a failed link: primary down, backup up.
/// A no-op when the link has not failed.
Topology restore(Topology topology, std::string_view failed_link_id);

/// Repairs a failed link: the primary returns to service and its backup goes
/// back to standby.
void repair_link(Topology& topology, std::string_view link_id);

/// `time_ms\telement_id\tsid_active\tevent`, one line per hop.
std::string export_hop_trace(const std::vector<Hop>& trace);

/// Sum of link and intra-EDC delays over the transitions recorded in a trace,
/// recomputed from the topology rather than from the arrival stamps.
Micros trace_delay(const Topology& topology, const std::vector<Hop>& trace);

}  // namespace wonder
