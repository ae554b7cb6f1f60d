#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wonder/mecd_model.hpp"
#include "wonder/oer_controller.hpp"
#include "wonder/traffic_classes.hpp"

namespace wonder {

/// Best feasible combination found by exhaustive enumeration.
struct OracleResult {
  Micros rtt{0};
  std::size_t feasible_walks = 0;
};

/// Minimum feasible RTT for every (class, CU, UPF, EC) that has one. Every
/// simple CU -> UPF and UPF -> EC walk is enumerated and paired; a walk is
/// admissible only if each hop is the forwarding plane's own shortest hop.
std::map<PathKey, OracleResult> oracle_min_rtts(const Topology& topology,
                                                const TrafficCatalog& catalog, Micros air_rtt);

struct OracleDiff {
  PathKey key;
  std::string message;
};

struct OracleReport {
  std::size_t combinations = 0;
  std::size_t feasible = 0;
  std::vector<OracleDiff> diffs;
};

/// Compares the controller's database and request-level choices against
/// exhaustive enumeration.
OracleReport diff_against_oracle(const OerController& controller);

std::string format_report(const OracleReport& report);

/// Seeded random MECD with at most `max_forwarding` CU/UPF/EC/router elements.
Topology random_topology(std::uint64_t seed, int max_forwarding = 8);

/// Topology object in the config schema accepted by the loader.
nlohmann::json topology_to_json(const Topology& topology);

}  // namespace wonder
