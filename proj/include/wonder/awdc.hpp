#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wonder/mecd_model.hpp"
#include "wonder/oer_controller.hpp"
#include "wonder/session.hpp"

namespace wonder {

enum class WorkloadState { Activating, Active, Replicating, Retired };

const char* to_string(WorkloadState state);

struct Workload {
  int workload_id = 0;
  SegmentId app_sid;
  /// Owning UE, or nullopt for a shared application.
  std::optional<std::string> ue_scope;
  std::string ec_element;
  WorkloadState state = WorkloadState::Activating;
  Micros activated_at{0};
  /// When a replica's context transfer completes.
  Micros ready_at{0};
  bool speculative = false;
  /// Set while a mispredicted replica waits out its grace period.
  std::optional<Micros> retire_at;
};

struct LedgerEntry {
  Micros time{0};
  SegmentId app_sid;
  std::optional<std::string> ue_scope;
  std::string ec;
  WorkloadState state = WorkloadState::Active;
};

struct MobilitySample {
  std::string ue_id;
  Micros time{0};
  std::string current_edc;
  std::optional<double> radio_signal_hint;
  /// Strongest neighbour cell's EDC, as exposed by the network.
  std::optional<std::string> neighbor_edc;
};

struct Prediction {
  std::string edc;
  double confidence = 0.0;
};

class HandoverPredictor {
 public:
  virtual ~HandoverPredictor() = default;
  /// Throws PreconditionViolation for fewer than two samples.
  virtual std::optional<Prediction> predict(const std::vector<MobilitySample>& history,
                                            Micros horizon) const = 0;
};

/// Linear trend over the last k signal hints. Confidence is the projected
/// decay over the horizon divided by `full_scale`, clamped to [0, 1].
class TrendPredictor : public HandoverPredictor {
 public:
  explicit TrendPredictor(std::map<std::string, std::set<std::string>> edc_adjacency = {},
                          std::size_t k = 3, double full_scale = 10.0);

  std::optional<Prediction> predict(const std::vector<MobilitySample>& history,
                                    Micros horizon) const override;

 private:
  std::map<std::string, std::set<std::string>> adjacency_;
  std::size_t k_;
  double full_scale_;
};

/// EDCs joined by at least one explicit admin_up link.
std::map<std::string, std::set<std::string>> edc_adjacency(const Topology& topology);

std::optional<Prediction> predict_handover(const std::vector<MobilitySample>& history,
                                           Micros horizon, const Topology& topology);

struct AwdcConfig {
  Micros activate_delay{5000};
  Micros replicate_delay{15000};
  int slots_per_ec = 8;
  double predict_threshold = 0.6;
  Micros grace{50000};
};

/// Application workload distribution controller.
class Awdc {
 public:
  Awdc(const Topology* topology, const SidRegistry* registry, AwdcConfig config = {});

  const AwdcConfig& config() const { return config_; }

  /// Starts a workload at `ec`; Active once the activation delay has passed.
  /// Idempotent for a live workload with the same (app, scope, ec).
  const Workload& activate(const SegmentId& app_sid, const std::string& ec,
                           const std::optional<std::string>& ue_scope, Micros now);

  /// Copies `source` to `target_ec`; the replica is Replicating until bound.
  const Workload& replicate(int source_id, const std::string& target_ec, Micros now,
                            bool speculative);

  /// Make-before-break: the replica becomes Active and the workload it
  /// replaces for the same (app, scope) is Retired at the same instant.
  void bind(int replica_id, Micros now);

  void retire(int workload_id, Micros now);

  /// Reactive replication of the bearer's workload into `target_edc`.
  const Workload& replicate_reactive(const UeSession& session, const Bearer& bearer,
                                     const std::string& target_edc, Micros now);

  /// Speculative replication ahead of a predicted handover. Returns nullopt
  /// when the prediction is below the configured threshold.
  std::optional<int> replicate_predictive(const UeSession& session, const Bearer& bearer,
                                          const Prediction& prediction, Micros now);

  /// Schedules the grace-period retirement of a mispredicted replica.
  void mark_mispredicted(int workload_id, Micros now);

  /// Hosting EC for a shared or anycast application as seen from `cu`,
  /// ignoring provider boundaries.
  std::string resolve_shared_app(const OerRequest& request) const;

  /// The live (non-retired) workload of (app, scope), preferring Active.
  const Workload* live(const SegmentId& app_sid, const std::optional<std::string>& ue_scope) const;
  /// A speculative replica of (app, scope) waiting at `ec`, if any.
  const Workload* standby(const SegmentId& app_sid, const std::optional<std::string>& ue_scope,
                          const std::string& ec) const;

  /// First EC of an EDC by element_id.
  std::optional<std::string> ec_in_edc(const std::string& edc_id) const;

  const Workload& workload(int id) const;
  const std::vector<Workload>& workloads() const { return workloads_; }
  /// Ledger ordered by time; equal times keep insertion order.
  std::vector<LedgerEntry> ledger() const;
  /// JSON lines `{time_ms, app_sid, ue_scope, ec, state}`.
  std::string export_ledger() const;

  int live_on(const std::string& ec) const;

 private:
  Workload& mutable_workload(int id);
  void log(const Workload& w, WorkloadState state, Micros time);

  const Topology* topology_;
  const SidRegistry* registry_;
  AwdcConfig config_;
  std::vector<Workload> workloads_;
  std::vector<LedgerEntry> ledger_;
};

/// Workload application used by a bearer: its pinned/required app, or the
/// per-class default.
SegmentId bearer_app(const Bearer& bearer);

}  // namespace wonder
