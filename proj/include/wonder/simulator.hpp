#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wonder/awdc.hpp"
#include "wonder/mobile_control_plane.hpp"
#include "wonder/oer_controller.hpp"
#include "wonder/scenario.hpp"
#include "wonder/signaling_log.hpp"
#include "wonder/sr_dataplane.hpp"

namespace wonder {

/// A packet carried from its ingress element through the UPF to its egress.
struct Journey {
  ForwardingOutcome outcome;
  Packet packet;
};

/// UL: CU -> UPF -> EC with the bearer's UL stacks. DL: EC -> UPF -> CU.
Journey carry(const Topology& topology, const SidRegistry& registry, const UeSession& session,
              Packet packet, Micros now);

struct EchoResult {
  bool delivered = false;
  Micros rtt{0};
  std::string reason;
  Packet request;
  std::optional<Packet> reply;
};

/// UL request from the CU to the EC and its mirrored DL reply.
/// rtt = air + UL delay + DL delay.
EchoResult echo(const Topology& topology, const SidRegistry& registry, const UeSession& session,
                int bearer_id, Micros t, Micros air_rtt);

/// Number of inter-EDC links a trace crosses.
int inter_edc_hops(const Topology& topology, const std::vector<Hop>& trace);
/// True when two consecutive distinct trace entries are both UPFs.
bool has_upf_to_upf_hop(const Topology& topology, const std::vector<Hop>& trace);

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t value);

struct PacketRecord {
  int packet_id = 0;
  std::string ue;
  Direction direction = Direction::UL;
  std::string tag;
  int bearer_id = 0;
  int class_id = 0;
  Micros injected_at{0};
  ForwardingStatus status = ForwardingStatus::InFlight;
  std::string reason;
  bool expected_drop = false;
  std::vector<Hop> trace;
};

struct ProbeRecord {
  Micros time{0};
  std::string label;
  std::string ue;
  int qfi = 0;
  int class_id = 0;
  bool delivered = false;
  Micros rtt{0};
  std::string reason;
  int request_packet = 0;
  std::optional<int> reply_packet;
};

struct ViolationRecord {
  std::string ue;
  int bearer_id = 0;
  int class_id = 0;
  Micros measured{0};
  Micros bound{0};
  std::string reason;
};

struct HandoverRecord {
  std::string ue;
  std::string source_cu;
  std::string target_cu;
  Micros trigger{0};
  Micros interruption{0};
  std::string old_upf;
  std::string new_upf;
  std::string ip_before;
  std::string ip_after;
  int dl_buffered = 0;
  int dl_lost = 0;
  std::optional<int> first_ul_inter_edc_hops;
  int prediction_hits = 0;
  int mispredicted = 0;
  std::vector<std::string> bearer_ecs;
  bool failed = false;
  std::string error;
};

struct FailureRecord {
  Micros time{0};
  std::string event;
  std::string ue;
  std::string label;
  std::string error;
  bool expected = false;
};

struct RunMetrics {
  std::map<int, std::vector<Micros>> per_class_rtt;
  std::vector<HandoverRecord> handovers;
  int injected = 0;
  int delivered = 0;
  std::map<std::string, int> dropped;
  int in_flight = 0;
  int unexpected_drops = 0;
  /// Events whose outcome contradicts their `expect` annotation.
  int unexpected_outcomes = 0;
  std::vector<ViolationRecord> violations;
  int prediction_hits = 0;
  int prediction_misses = 0;
  std::vector<ProbeRecord> probes;
  std::vector<FailureRecord> failures;

  int dropped_total() const;
  bool conserved() const { return injected == delivered + dropped_total() + in_flight; }
};

struct RunResult {
  RunMetrics metrics;
  std::string signaling_jsonl;
  std::string hop_traces_tsv;
  std::string workloads_jsonl;
  std::string paths_json;
  std::string metrics_json;
  std::string signaling_digest;
  std::string traces_digest;
  std::string metrics_digest;
  int exit_code = 0;
};

nlohmann::ordered_json metrics_to_json(const RunMetrics& metrics);
std::string format_metrics_table(const RunMetrics& metrics);
/// 0 when there are no violations, unexpected drops or unexpected outcomes.
int exit_code(const RunMetrics& metrics);

class Simulator {
 public:
  explicit Simulator(Scenario scenario, std::optional<std::uint64_t> seed = std::nullopt);
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  RunResult run();

  const Scenario& scenario() const { return scenario_; }
  const Topology& topology() const { return topology_; }
  const SidRegistry& registry() const { return registry_; }
  const OerController& controller() const { return oerc_; }
  const Awdc& awdc() const { return awdc_; }
  const MobileControlPlane& control_plane() const { return mcp_; }
  const SignalingLog& log() const { return log_; }
  const std::vector<PacketRecord>& packets() const { return packets_; }
  const RunMetrics& metrics() const { return metrics_; }

 private:
  enum class Internal { None, WindowOpen, HandoverComplete, RestorationComplete, WorkloadRetire, Inject };

  struct Pending {
    Micros time{0};
    std::uint64_t seq = 0;
    int scenario_index = -1;
    Internal internal = Internal::None;
    std::string ue;
    std::string link;
    int workload = -1;
    int inject_index = 0;

    bool operator>(const Pending& o) const {
      return time != o.time ? time > o.time : seq > o.seq;
    }
  };

  void schedule(Pending p);
  void dispatch(const Pending& p);
  void on_scenario_event(const ScenarioEvent& ev, Micros now);
  void on_attach(const ScenarioEvent& ev, Micros now);
  void on_echo(const ScenarioEvent& ev, Micros now);
  void on_send(const ScenarioEvent& ev, Micros now, int index);
  void on_measurement_report(const ScenarioEvent& ev, Micros now);
  void on_handover_complete(const std::string& ue, Micros now);
  void on_link_fail(const ScenarioEvent& ev, Micros now);
  void on_register_element(const ScenarioEvent& ev, Micros now);
  void note_failure(const ScenarioEvent& ev, Micros now, const std::string& error);
  void note_success(const ScenarioEvent& ev);
  void schedule_retirements(const std::vector<int>& workloads);

  int new_packet(const std::string& ue, Direction dir, const std::string& tag, const Bearer& bearer,
                 Micros now, bool expect_drop);
  void settle(int packet_id, const Packet& packet, ForwardingStatus status, const std::string& reason);
  void observe_ul(const std::string& ue, const std::vector<Hop>& trace);
  void check_bound(const std::string& ue, const Bearer& bearer, Micros measured,
                   const std::string& reason);
  Micros jitter();

  Scenario scenario_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  Topology topology_;
  SidRegistry registry_;
  TrafficCatalog catalog_;
  OerController oerc_;
  SignalingLog log_;
  Awdc awdc_;
  MobileControlPlane mcp_;

  std::vector<Pending> queue_;
  std::uint64_t next_seq_ = 0;
  Micros now_{0};
  std::vector<PacketRecord> packets_;
  std::map<std::string, std::vector<int>> window_dl_;
  std::map<std::string, std::string> ip_before_;
  std::map<std::string, std::size_t> awaiting_ul_;
  std::map<int, Micros> retire_scheduled_;
  RunMetrics metrics_;
};

}  // namespace wonder
