#include <gtest/gtest.h>

#include "support.hpp"
#include "wonder/awdc.hpp"
#include "wonder/error.hpp"

using namespace wonder;

namespace {

MobilitySample sample(double t_ms, double hint, std::string neighbor = "edc-b") {
  return {"ue-1", from_ms(t_ms), "edc-a", hint, std::move(neighbor)};
}

UeSession session_on(const std::string& ec) {
  UeSession s;
  s.ue_id = "ue-1";
  s.serving_cu = "cu-a";
  s.serving_upf = "upf-a";
  s.state = SessionState::Active;
  Bearer b;
  b.bearer_id = 1;
  b.class_id = 0;
  b.ec_element = ec;
  b.app_sid = SegmentId::app(9500);
  s.bearers.push_back(b);
  return s;
}

}  // namespace

class Workloads : public ::testing::Test {
 protected:
  Topology topo = fixtures::scenario("awr_reactive").topology;
  SidRegistry reg = SidRegistry::from_topology(topo);
  Awdc awdc{&topo, &reg};
};

TEST_F(Workloads, ActivationTakesFiveMilliseconds) {
  const auto& w = awdc.activate(SegmentId::app(9500), "ec-a", "ue-1", from_ms(10));
  EXPECT_EQ(w.activated_at, from_ms(15));
  const auto ledger = awdc.ledger();
  ASSERT_EQ(ledger.size(), 2u);
  EXPECT_EQ(ledger[0].state, WorkloadState::Activating);
  EXPECT_EQ(ledger[1].state, WorkloadState::Active);
  EXPECT_EQ(ledger[1].time, from_ms(15));
}

TEST_F(Workloads, ActivationIsIdempotent) {
  const int id = awdc.activate(SegmentId::app(9500), "ec-a", "ue-1", Micros{0}).workload_id;
  EXPECT_EQ(awdc.activate(SegmentId::app(9500), "ec-a", "ue-1", from_ms(3)).workload_id, id);
  EXPECT_EQ(awdc.workloads().size(), 1u);
}

TEST_F(Workloads, OnlyEdgeComputeHostsWorkloads) {
  try {
    awdc.activate(SegmentId::app(9500), "upf-a", "ue-1", Micros{0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotAnEc);
  }
}

TEST_F(Workloads, SlotsRunOut) {
  AwdcConfig cfg;
  cfg.slots_per_ec = 2;
  Awdc small(&topo, &reg, cfg);
  small.activate(SegmentId::app(9500), "ec-a", "ue-1", Micros{0});
  small.activate(SegmentId::app(9500), "ec-a", "ue-2", Micros{0});
  try {
    small.activate(SegmentId::app(9500), "ec-a", "ue-3", Micros{0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CapacityExceeded);
  }
}

TEST_F(Workloads, BindIsMakeBeforeBreak) {
  const int src = awdc.activate(SegmentId::app(9500), "ec-a", "ue-1", Micros{0}).workload_id;
  const int rep = awdc.replicate(src, "ec-b", from_ms(100), false).workload_id;
  EXPECT_EQ(awdc.workload(rep).state, WorkloadState::Replicating);
  EXPECT_EQ(awdc.workload(rep).ready_at, from_ms(115));
  EXPECT_THROW(awdc.bind(rep, from_ms(110)), Error);
  awdc.bind(rep, from_ms(115));
  EXPECT_EQ(awdc.workload(rep).state, WorkloadState::Active);
  EXPECT_EQ(awdc.workload(src).state, WorkloadState::Retired);

  // The replica is Active no later than the original is Retired.
  std::optional<Micros> up, down;
  for (const auto& e : awdc.ledger()) {
    if (e.ec == "ec-b" && e.state == WorkloadState::Active) up = e.time;
    if (e.ec == "ec-a" && e.state == WorkloadState::Retired) down = e.time;
  }
  ASSERT_TRUE(up && down);
  EXPECT_LE(*up, *down);
  EXPECT_EQ(awdc.live(SegmentId::app(9500), "ue-1")->ec_element, "ec-b");
}

TEST_F(Workloads, ReactiveReplicationTargetsTheNewEdc) {
  const auto s = session_on("ec-a");
  awdc.activate(SegmentId::app(9500), "ec-a", "ue-1", Micros{0});
  const auto& r = awdc.replicate_reactive(s, s.bearers[0], "edc-c", from_ms(50));
  EXPECT_EQ(r.ec_element, "ec-c");
  EXPECT_FALSE(r.speculative);
}

TEST_F(Workloads, PredictiveBelowThresholdDoesNothing) {
  const auto s = session_on("ec-a");
  awdc.activate(SegmentId::app(9500), "ec-a", "ue-1", Micros{0});
  EXPECT_FALSE(awdc.replicate_predictive(s, s.bearers[0], {"edc-b", 0.59}, from_ms(10)));
  EXPECT_EQ(awdc.workloads().size(), 1u);
  const auto id = awdc.replicate_predictive(s, s.bearers[0], {"edc-b", 0.6}, from_ms(10));
  ASSERT_TRUE(id);
  EXPECT_TRUE(awdc.workload(*id).speculative);
  EXPECT_EQ(awdc.standby(SegmentId::app(9500), "ue-1", "ec-b")->workload_id, *id);
}

TEST_F(Workloads, MispredictedReplicaGetsAGracePeriod) {
  const int src = awdc.activate(SegmentId::app(9500), "ec-a", "ue-1", Micros{0}).workload_id;
  const int rep = awdc.replicate(src, "ec-b", from_ms(10), true).workload_id;
  awdc.mark_mispredicted(rep, from_ms(40));
  EXPECT_EQ(awdc.workload(rep).retire_at, from_ms(90));
  awdc.retire(rep, from_ms(90));
  EXPECT_EQ(awdc.workload(rep).state, WorkloadState::Retired);
  EXPECT_EQ(awdc.workload(src).state, WorkloadState::Active);
}

TEST_F(Workloads, LedgerExport) {
  awdc.activate(SegmentId::app(9500), "ec-a", "ue-1", Micros{0});
  const std::string out = awdc.export_ledger();
  EXPECT_NE(out.find("\"ec\":\"ec-a\""), std::string::npos);
  EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 2);
}

TEST(Predictor, DecayingSignalPointsAtTheNeighbour) {
  const std::vector<MobilitySample> h = {sample(100, 10), sample(200, 7), sample(300, 4)};
  const auto p = TrendPredictor().predict(h, from_ms(100));
  ASSERT_TRUE(p);
  EXPECT_EQ(p->edc, "edc-b");
  // slope -0.03/ms, projected 4 - 3 = 1, decay 10 - 1 = 9 over a full scale of 10
  EXPECT_NEAR(p->confidence, 0.9, 1e-9);
}

TEST(Predictor, ConfidenceSaturates) {
  const std::vector<MobilitySample> h = {sample(100, 10), sample(200, 7), sample(300, 4)};
  EXPECT_DOUBLE_EQ(TrendPredictor().predict(h, from_ms(1000))->confidence, 1.0);
}

TEST(Predictor, FlatSignalPredictsNothing) {
  const std::vector<MobilitySample> h = {sample(100, 6), sample(200, 6), sample(300, 6)};
  EXPECT_FALSE(TrendPredictor().predict(h, from_ms(100)));
}

TEST(Predictor, RisingSignalPredictsNothing) {
  const std::vector<MobilitySample> h = {sample(100, 4), sample(200, 7)};
  EXPECT_FALSE(TrendPredictor().predict(h, from_ms(100)));
}

TEST(Predictor, NeedsTwoSamples) {
  try {
    TrendPredictor().predict({sample(100, 10)}, from_ms(100));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PreconditionViolation);
  }
}

TEST(Predictor, FallsBackToTheOnlyUnvisitedNeighbour) {
  const Topology topo = fixtures::scenario("awr_reactive").topology;
  std::vector<MobilitySample> h = {sample(100, 10, ""), sample(200, 7, ""), sample(300, 4, "")};
  for (auto& s : h) s.neighbor_edc.reset();
  // edc-a borders both edc-b and edc-c, so nothing is singled out
  EXPECT_FALSE(predict_handover(h, from_ms(100), topo));
  for (auto& s : h) s.current_edc = "edc-b";
  const auto p = predict_handover(h, from_ms(100), topo);
  ASSERT_TRUE(p);
  EXPECT_EQ(p->edc, "edc-a");
}

TEST(SharedApps, ResolveToTheirHost) {
  const auto sc = fixtures::scenario("awi");
  const auto reg = SidRegistry::from_topology(sc.topology);
  Awdc awdc(&sc.topology, &reg);
  OerRequest req;
  req.cu_id = "cu-1";
  req.required_app_sid = SegmentId::app(9100);
  EXPECT_EQ(awdc.resolve_shared_app(req), "ec-3");
  req.cu_id = "cu-2";
  EXPECT_EQ(awdc.resolve_shared_app(req), "ec-3");
  req.required_app_sid = SegmentId::anycast(9200);
  EXPECT_EQ(awdc.resolve_shared_app(req), "ec-2");
  req.required_app_sid = SegmentId::app(9999);
  try {
    awdc.resolve_shared_app(req);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AppNotPresent);
  }
}
