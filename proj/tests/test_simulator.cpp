#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "support.hpp"
#include "wonder/simulator.hpp"

using namespace wonder;

namespace {

const std::vector<std::string> kFixtures = {
    "empty",        "oer_basic",    "table1",         "no_feasible_path", "shape_same_edc",
    "shape_remote_upf_ec", "shape_remote_ec", "mer_handover", "multi_bearer", "restoration",
    "awr_predictive", "awr_reactive", "awr_mispredict", "awi"};

RunResult run(const std::string& name, std::optional<std::uint64_t> seed = std::nullopt) {
  Simulator sim(fixtures::scenario(name), seed);
  return sim.run();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(WONDER_SIM) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

class EveryRun : public ::testing::TestWithParam<std::string> {};

TEST_P(EveryRun, PacketsAreConserved) {
  const auto r = run(GetParam());
  const auto& m = r.metrics;
  EXPECT_TRUE(m.conserved()) << m.injected << " " << m.delivered << " " << m.dropped_total() << " "
                             << m.in_flight;
  EXPECT_EQ(m.in_flight, 0);
  EXPECT_EQ(r.exit_code, 0) << format_metrics_table(m);
}

TEST_P(EveryRun, IsDeterministic) {
  const auto a = run(GetParam());
  const auto b = run(GetParam());
  EXPECT_EQ(a.signaling_digest, b.signaling_digest);
  EXPECT_EQ(a.traces_digest, b.traces_digest);
  EXPECT_EQ(a.metrics_digest, b.metrics_digest);
  EXPECT_EQ(a.metrics_json, b.metrics_json);
}

TEST_P(EveryRun, NoPacketTakesAUpfToUpfHop) {
  Simulator sim(fixtures::scenario(GetParam()));
  sim.run();
  for (const auto& p : sim.packets())
    EXPECT_FALSE(has_upf_to_upf_hop(sim.topology(), p.trace)) << p.packet_id;
}

INSTANTIATE_TEST_SUITE_P(Fixtures, EveryRun, ::testing::ValuesIn(kFixtures));

TEST(Simulator, EmptyScenario) {
  const auto r = run("empty");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.metrics.injected, 0);
  EXPECT_TRUE(r.signaling_jsonl.empty());
  EXPECT_EQ(r.metrics_digest.size(), 16u);
}

TEST(Simulator, SameEdcEchoRtt) {
  const auto r = run("shape_same_edc");
  ASSERT_FALSE(r.metrics.probes.empty());
  EXPECT_TRUE(r.metrics.probes[0].delivered);
  EXPECT_EQ(r.metrics.probes[0].rtt, from_ms(2.3));
}

TEST(Simulator, RttDoesNotDependOnTheUeAddress) {
  Simulator sim(fixtures::scenario("shape_remote_ec"));
  sim.run();
  const auto& sessions = sim.control_plane().sessions();
  ASSERT_FALSE(sessions.empty());
  UeSession s = sessions.begin()->second;
  const auto a = echo(sim.topology(), sim.registry(), s, s.bearers[0].bearer_id, from_ms(500),
                      Micros{2000});
  s.ue_ip = "10.99.99.99";
  const auto b = echo(sim.topology(), sim.registry(), s, s.bearers[0].bearer_id, from_ms(500),
                      Micros{2000});
  ASSERT_TRUE(a.delivered && b.delivered);
  EXPECT_EQ(a.rtt, b.rtt);
}

TEST(Simulator, SeedOverridesScenarioSeed) {
  auto sc = fixtures::scenario("oer_basic");
  sc.defaults.jitter = from_ms(0.5);
  Simulator a(sc, 11), b(sc, 11), c(sc, 12);
  const auto ra = a.run();
  const auto rb = b.run();
  const auto rc = c.run();
  EXPECT_EQ(ra.traces_digest, rb.traces_digest);
  EXPECT_NE(ra.traces_digest, rc.traces_digest);
  for (const auto& p : ra.metrics.probes) EXPECT_TRUE(p.delivered);
}

TEST(Simulator, MetricsJsonCarriesDigests) {
  const auto r = run("mer_handover");
  const auto doc = nlohmann::json::parse(r.metrics_json);
  EXPECT_EQ(doc["digests"]["signaling"], r.signaling_digest);
  EXPECT_EQ(doc["digests"]["hop_traces"], r.traces_digest);
  EXPECT_EQ(r.signaling_digest, hex64(fnv1a64(r.signaling_jsonl)));
  EXPECT_EQ(r.traces_digest, hex64(fnv1a64(r.hop_traces_tsv)));
}

TEST(Simulator, HandoverBuffersAndReplaysDownlink) {
  const auto r = run("mer_handover");
  ASSERT_EQ(r.metrics.handovers.size(), 1u);
  const auto& h = r.metrics.handovers[0];
  EXPECT_EQ(h.ip_before, h.ip_after);
  EXPECT_EQ(h.interruption, from_ms(8));
  EXPECT_GT(h.dl_buffered, 0);
  EXPECT_EQ(h.dl_lost, 0);
  EXPECT_EQ(h.old_upf, "upf-1");
  EXPECT_EQ(h.new_upf, "upf-2");
  // cu-2 -> upf-2 -> ec-1 crosses the one link between the EDCs; no detour via upf-1
  ASSERT_TRUE(h.first_ul_inter_edc_hops);
  EXPECT_EQ(*h.first_ul_inter_edc_hops, 1);
}

TEST(Simulator, RestorationDropsOnlyDuringSwitchover) {
  const auto r = run("restoration");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_GT(r.metrics.dropped.count("restoration"), 0u);
  EXPECT_EQ(r.metrics.unexpected_drops, 0);
  ASSERT_FALSE(r.metrics.probes.empty());
  EXPECT_TRUE(r.metrics.probes.back().delivered);
  EXPECT_LE(r.metrics.probes.back().rtt, from_ms(7));
}

TEST(Simulator, PredictionOutcomes) {
  EXPECT_EQ(run("awr_predictive").metrics.prediction_hits, 1);
  EXPECT_EQ(run("awr_mispredict").metrics.prediction_misses, 1);
  EXPECT_EQ(run("awr_predictive").metrics.handovers.at(0).interruption, from_ms(8));
  EXPECT_EQ(run("awr_reactive").metrics.handovers.at(0).interruption, from_ms(23));
}

class Golden : public ::testing::TestWithParam<std::string> {};

TEST_P(Golden, HopTracesMatch) {
  const auto expected = fixtures::read_file(std::string(WONDER_GOLDEN) + "/" + GetParam() + ".tsv");
  ASSERT_FALSE(expected.empty());
  EXPECT_EQ(run(GetParam()).hop_traces_tsv, expected);
}

INSTANTIATE_TEST_SUITE_P(Shapes, Golden,
                         ::testing::Values("shape_same_edc", "shape_remote_upf_ec",
                                           "shape_remote_ec"));

TEST(Cli, ExitCodes) {
  const auto dir = std::filesystem::temp_directory_path() / "wonder-cli-test";
  std::filesystem::create_directories(dir);
  EXPECT_EQ(cli("run " + fixtures::fixture_path("oer_basic.json") + " --trace-dir " + dir.string()), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "metrics.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "hop_traces.tsv"));
  EXPECT_EQ(cli("validate " + fixtures::fixture_path("awi.json")), 0);
  EXPECT_EQ(cli("oracle " + fixtures::fixture_path("oer_basic.json")), 0);
  EXPECT_EQ(cli("validate " + (dir / "missing.json").string()), 2);

  const auto bad = dir / "bad.json";
  std::ofstream(bad) << R"({"format_version": 3})";
  EXPECT_EQ(cli("run " + bad.string()), 2);
  std::filesystem::remove_all(dir);
}
