#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wonder/awdc.hpp"
#include "wonder/oer_controller.hpp"
#include "wonder/session.hpp"
#include "wonder/signaling_log.hpp"
#include "wonder/sr_dataplane.hpp"
#include "wonder/traffic_classes.hpp"

namespace wonder {

enum class AwrMode { Off, Reactive, Predictive };
enum class AwrPolicy { Lazy, Eager };

const char* to_string(AwrMode mode);
std::optional<AwrMode> parse_awr_mode(std::string_view text);
std::optional<AwrPolicy> parse_awr_policy(std::string_view text);

struct ControlPlaneConfig {
  Micros signaling_step{1000};
  AwrMode awr_mode = AwrMode::Off;
  AwrPolicy awr_policy = AwrPolicy::Lazy;
  /// Unbounded when unset.
  std::optional<std::size_t> ho_buffer_limit;
  Micros predict_horizon{100000};
  /// QFI -> class for bearers that do not name a class.
  std::map<int, int> qfi_map{{5, 0}, {9, 1}};
};

struct BearerSpec {
  int qfi = 0;
  std::optional<int> class_id;
  std::optional<SegmentId> app_sid;
};

struct HandoverEvent {
  std::string ue_id;
  std::string source_cu;
  std::string target_cu;
  Micros trigger_time{0};
};

struct HandoverPlan {
  HandoverEvent event;
  std::string old_upf;
  std::string new_upf;
  Micros window_start{0};
  Micros completion{0};
  /// New path per bearer, aligned with the session's bearer order.
  std::vector<PathRecord> paths;
  /// Bearer -> replica workload bound at completion.
  std::map<int, int> bind_replicas;
  std::set<int> violating;
  /// Speculative replicas the UE did not use.
  std::vector<int> mispredicted;
  int prediction_hits = 0;

  Micros interruption() const { return completion - window_start; }
};

/// AMF/SMF/NSSF roles collapsed into one state machine per UE session.
class MobileControlPlane {
 public:
  MobileControlPlane(OerController& oerc, Awdc& awdc, SignalingLog& log,
                     ControlPlaneConfig config = {},
                     std::unique_ptr<HandoverPredictor> predictor = nullptr);

  const ControlPlaneConfig& config() const { return config_; }

  /// All-or-nothing attach. Throws AttachFailed when any bearer has no
  /// feasible path; no session state is kept in that case.
  const UeSession& attach(const std::string& ue_id, const std::string& cu_id,
                          const std::vector<BearerSpec>& bearers, Micros now);

  /// Runs the path-switch computation and logs the handover procedure.
  /// Throws HandoverFailed (session untouched) when a bearer cannot be
  /// re-pathed and AWR is off.
  const HandoverPlan& begin_handover(const std::string& ue_id, const std::string& target_cu,
                                     Micros now);
  /// The UE attaches to the target CU; DL is buffered from here on.
  void open_window(const std::string& ue_id, Micros now);
  /// Installs the new stacks, binds relocated workloads and returns the
  /// buffered DL packets in arrival order.
  std::vector<Packet> complete_handover(const std::string& ue_id, Micros now);
  /// The whole procedure at once.
  const UeSession& handover(const std::string& ue_id, const std::string& target_cu, Micros now);

  /// Queues a DL packet while the session is handing over. Returns false
  /// when a finite buffer is full.
  bool buffer_dl(const std::string& ue_id, Packet packet);
  std::size_t buffered(const std::string& ue_id) const;

  /// Feeds the predictor; in predictive mode, starts speculative replicas.
  /// Returns the new replica workload ids.
  std::vector<int> on_mobility_sample(const MobilitySample& sample, Micros now);

  const UeSession& session(const std::string& ue_id) const;
  const UeSession* find_session(const std::string& ue_id) const;
  const std::map<std::string, UeSession>& sessions() const { return sessions_; }
  const HandoverPlan* pending(const std::string& ue_id) const;
  /// The most recent completed handover of a UE.
  const HandoverPlan* last_handover(const std::string& ue_id) const;
  /// Every ue_ip ever observed per UE.
  const std::map<std::string, std::set<std::string>>& observed_ips() const { return ips_; }

 private:
  UeSession& mutable_session(const std::string& ue_id);
  void emit(Micros t, const std::string& step, const std::string& from, const std::string& to,
            const std::string& ue, const std::string& detail);
  std::vector<PathRecord> repath(const UeSession& session, const std::string& target_cu,
                                 const std::map<int, std::string>& overrides,
                                 const std::set<int>& violating, std::string* upf);

  OerController& oerc_;
  Awdc& awdc_;
  SignalingLog& log_;
  ControlPlaneConfig config_;
  std::unique_ptr<HandoverPredictor> predictor_;
  std::map<std::string, UeSession> sessions_;
  std::map<std::string, SessionBindings> bindings_;
  std::map<std::string, HandoverPlan> pending_;
  std::map<std::string, HandoverPlan> completed_;
  std::map<std::string, std::deque<Packet>> dl_buffer_;
  std::map<std::string, std::vector<MobilitySample>> history_;
  std::map<std::string, std::set<std::string>> ips_;
  int next_ip_ = 1;
};

/// SRv6-style DL replay marker for Xn forwarding: source CU -> target CU.
SegmentList xn_stack(const SidRegistry& registry, const std::string& target_cu);

}  // namespace wonder
