#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wonder/awdc.hpp"
#include "wonder/mecd_model.hpp"
#include "wonder/mobile_control_plane.hpp"
#include "wonder/sr_dataplane.hpp"
#include "wonder/traffic_classes.hpp"

namespace wonder {

struct ScenarioDefaults {
  Micros air_rtt{2000};
  Micros signaling_step{1000};
  Micros activate{5000};
  Micros replicate{15000};
  double predict_threshold = 0.6;
  Micros predict_horizon{100000};
  AwrMode awr_mode = AwrMode::Off;
  AwrPolicy awr_policy = AwrPolicy::Lazy;
  std::optional<std::size_t> ho_buffer_limit;
  Micros grace{50000};
  int ec_slots = 8;
  /// Protection switch-over time; the smallest Protected-class restoration
  /// time when unset.
  std::optional<Micros> restoration;
  /// Upper bound of the random offset added to probe injection times.
  Micros jitter{0};
};

enum class EventKind {
  Attach,
  Echo,
  Send,
  MobilitySample,
  MeasurementReport,
  LinkFail,
  LinkRestore,
  RegisterElement,
};

const char* to_string(EventKind kind);

/// Expected outcome annotated on an event; unset means success.
enum class Expect { Unset, Delivered, Dropped, Fail };

struct ScenarioEvent {
  Micros time{0};
  EventKind kind = EventKind::Echo;
  std::string ue;
  std::string label;
  Expect expect = Expect::Unset;

  // attach
  std::string cu;
  std::vector<BearerSpec> bearers;
  // echo / send
  int qfi = 0;
  Direction direction = Direction::DL;
  int count = 1;
  Micros interval{0};
  // mobility_sample
  MobilitySample sample;
  // measurement_report
  std::string target_cu;
  // link_fail / link_restore
  std::string link;
  // register_element
  ElementRecord element;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  ScenarioDefaults defaults;
  Topology topology;
  TrafficCatalog catalog = TrafficCatalog::defaults();
  std::map<int, int> qfi_map;
  std::vector<ScenarioEvent> events;
};

/// Parses and validates a scenario document. Throws ParseError or a
/// ValidationError listing every problem with its field path.
Scenario load_scenario(std::string_view text, bool lax = false);
Scenario load_scenario_file(const std::string& path, bool lax = false);

}  // namespace wonder
