#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "wonder/error.hpp"
#include "wonder/oer_controller.hpp"
#include "wonder/path_oracle.hpp"
#include "wonder/scenario.hpp"
#include "wonder/simulator.hpp"

namespace {

constexpr int kValidationFailure = 2;

std::optional<wonder::Scenario> load(const std::string& path, bool lax) {
  try {
    return wonder::load_scenario_file(path, lax);
  } catch (const wonder::ValidationError& e) {
    std::cerr << path << ": invalid scenario\n";
    for (const auto& p : e.problems()) std::cerr << "  " << p << '\n';
  } catch (const wonder::Error& e) {
    std::cerr << path << ": " << e.what() << '\n';
  }
  return std::nullopt;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

int run(const std::string& path, bool dump_paths, const std::string& trace_dir, bool lax,
        std::optional<std::uint64_t> seed, bool json_metrics) {
  auto scenario = load(path, lax);
  if (!scenario) return kValidationFailure;
  wonder::Simulator sim(std::move(*scenario), seed);
  const wonder::RunResult r = sim.run();

  if (!trace_dir.empty()) {
    std::filesystem::create_directories(trace_dir);
    const std::filesystem::path dir(trace_dir);
    write_file(dir / "signaling.jsonl", r.signaling_jsonl);
    write_file(dir / "hop_traces.tsv", r.hop_traces_tsv);
    write_file(dir / "workloads.jsonl", r.workloads_jsonl);
    write_file(dir / "paths.json", r.paths_json);
    write_file(dir / "metrics.json", r.metrics_json);
  }
  if (dump_paths) std::cout << r.paths_json << '\n';
  if (json_metrics) {
    std::cout << r.metrics_json;
  } else {
    std::cout << "scenario  " << sim.scenario().name << '\n'
              << wonder::format_metrics_table(r.metrics) << "digest signaling=" << r.signaling_digest
              << " hop_traces=" << r.traces_digest << " metrics=" << r.metrics_digest << '\n';
  }
  return r.exit_code;
}

int validate(const std::string& path, bool lax) {
  auto scenario = load(path, lax);
  if (!scenario) return kValidationFailure;
  std::size_t elements = scenario->topology.elements().size();
  std::cout << path << ": ok (" << scenario->topology.edcs.size() << " EDCs, " << elements
            << " elements, " << scenario->topology.links.size() << " links, "
            << scenario->events.size() << " events)\n";
  return 0;
}

int oracle(const std::string& path, bool lax) {
  auto scenario = load(path, lax);
  if (!scenario) return kValidationFailure;
  const auto registry = wonder::SidRegistry::from_topology(scenario->topology);
  wonder::OerController controller(
      {&scenario->topology, &registry, &scenario->catalog, scenario->defaults.air_rtt});
  const auto report = wonder::diff_against_oracle(controller);
  std::cout << wonder::format_report(report);
  return report.diffs.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge routing and mobility simulator"};
  app.require_subcommand(1);

  std::string scenario;
  bool dump_paths = false;
  bool lax = false;
  bool json_metrics = false;
  std::string trace_dir;
  std::optional<std::uint64_t> seed;

  auto* run_cmd = app.add_subcommand("run", "Run a scenario");
  run_cmd->add_option("scenario", scenario, "Scenario JSON file")->required();
  run_cmd->add_flag("--dump-paths", dump_paths, "Print the path database");
  run_cmd->add_option("--trace-dir", trace_dir, "Write logs, traces and metrics here");
  run_cmd->add_flag("--lax", lax, "Ignore unknown keys");
  run_cmd->add_option("--seed", seed, "Override the scenario seed");
  run_cmd->add_flag("--json-metrics", json_metrics, "Print metrics as JSON");

  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario without running it");
  validate_cmd->add_option("scenario", scenario, "Scenario JSON file")->required();
  validate_cmd->add_flag("--lax", lax, "Ignore unknown keys");

  auto* oracle_cmd = app.add_subcommand("oracle", "Compare the controller with exhaustive search");
  oracle_cmd->add_option("scenario", scenario, "Scenario JSON file")->required();
  oracle_cmd->add_flag("--lax", lax, "Ignore unknown keys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kValidationFailure;
  }

  try {
    if (*run_cmd) return run(scenario, dump_paths, trace_dir, lax, seed, json_metrics);
    if (*validate_cmd) return validate(scenario, lax);
    if (*oracle_cmd) return oracle(scenario, lax);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
