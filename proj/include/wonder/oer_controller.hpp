#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "wonder/mecd_model.hpp"
#include "wonder/routing.hpp"
#include "wonder/session.hpp"
#include "wonder/traffic_classes.hpp"

namespace wonder {

/// A precomputed, class-feasible CU -> UPF -> EC path and its stacks.
struct PathRecord {
  int class_id = 0;
  std::string src_element;  // CU
  std::string upf_element;
  std::string ec_element;
  StackSet stacks;
  /// End-to-end round trip: air interface + 2 x one-way fabric delay.
  Micros rtt{0};
  /// Round trip with every protected link replaced by its backup.
  Micros backup_rtt{0};
  bool is_protected = false;
  /// Element sequence of the UL walk, CU first, EC last.
  std::vector<std::string> ul_walk;

  /// CU NodeSid followed by the UL stacks, as drawn end to end.
  SegmentList end_to_end(const SidRegistry& registry) const;
  std::size_t segment_count() const { return stacks.ul_cu.size() + stacks.ul_upf.size(); }
};

struct OerRequest {
  int traffic_class_id = 0;
  std::string cu_id;
  std::string upf_id;  // 5GCP hint, may be overridden
  int qfi = 0;
  int bearer_id = 0;
  std::string ue_id;
  std::optional<SegmentId> required_app_sid;
  /// EC the bearer is pinned to (path updates and relocations).
  std::optional<std::string> pinned_ec;
};

struct OerResponse {
  PathRecord path;
  std::string selected_upf;
  std::string selected_ec;
};

struct PathKey {
  int class_id = 0;
  std::string cu;
  std::string upf;
  std::string ec;
  auto operator<=>(const PathKey&) const = default;
};

struct PathDatabase {
  std::map<PathKey, PathRecord> records;
  /// Combinations with no feasible path, with the reason.
  std::map<PathKey, std::string> infeasible;

  const PathRecord* find(const PathKey& key) const;
  std::vector<const PathRecord*> for_source(int class_id, std::string_view cu) const;
  /// JSON array of records ordered by (class, src, rtt, upf, ec).
  std::string dump_json(const SidRegistry& registry) const;
};

/// Result of the single-leg engine.
struct ConstrainedPath {
  SegmentList segments;
  Micros rtt{0};  // 2 x one-way, no air interface
  Route primary;
  /// The protected route (backups substituted) for Protected classes.
  std::optional<Route> backup;
};

/// Context the controller computes over. Topology and registry are owned by
/// the caller and must outlive the controller.
struct ControllerInputs {
  const Topology* topology = nullptr;
  const SidRegistry* registry = nullptr;
  const TrafficCatalog* catalog = nullptr;
  Micros air_rtt{2000};
};

/// Minimal segment list that makes the forwarding plane follow `walk`
/// exactly, starting at walk.front(). Returns nullopt when a waypoint has no
/// SID that resolves to it from the preceding segment.
std::optional<SegmentList> encode_segments(const Topology& topology, const SidRegistry& registry,
                                           const Route& walk);

/// Minimum-delay class-feasible route between two elements.
ConstrainedPath compute_constrained_path(const Topology& topology, const SidRegistry& registry,
                                         std::string_view src, std::string_view dst,
                                         const TrafficClass& traffic_class);

PathDatabase build_path_database(const ControllerInputs& in);

/// The optimized edge routing controller.
class OerController {
 public:
  explicit OerController(ControllerInputs inputs);

  /// Recomputes the path database from the current topology.
  void rebuild();
  const PathDatabase& database() const { return db_; }
  const ControllerInputs& inputs() const { return in_; }

  OerResponse handle_oer_request(const OerRequest& request) const;

  /// Joint request for every bearer of one session: all bearers share one
  /// UPF, chosen to minimise the summed RTT (ties: lowest element_id).
  std::vector<OerResponse> handle_session_request(const std::vector<OerRequest>& requests) const;

  /// Re-paths every bearer of `session` from `new_cu` to its current EC, or to
  /// `ec_overrides[bearer_id]` when given. Throws NoFeasiblePathError naming
  /// the bearers that cannot meet their class bound.
  std::vector<OerResponse> handle_path_update(
      const UeSession& session, std::string_view new_cu,
      const std::map<int, std::string>& ec_overrides = {}) const;

  /// Minimum-RTT path to a fixed EC that ignores every class constraint,
  /// over the UPFs of the CU's provider (or only `upf` when given). Used when
  /// a bearer must stay connected on a flagged, violating path.
  std::optional<PathRecord> best_effort_path(int class_id, std::string_view cu, std::string_view ec,
                                             const std::optional<std::string>& upf = {}) const;

 private:
  std::vector<const PathRecord*> candidates(const OerRequest& request) const;
  std::optional<std::string> resolve_ec(const OerRequest& request) const;

  ControllerInputs in_;
  PathDatabase db_;
};

/// Best record under the controller's ordering: rtt, segment count,
/// end-to-end stack, then UPF and EC ids.
bool better_record(const PathRecord& a, const PathRecord& b);

}  // namespace wonder
