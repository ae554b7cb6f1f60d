#include <gtest/gtest.h>

#include "support.hpp"
#include "wonder/error.hpp"
#include "wonder/mobile_control_plane.hpp"

using namespace wonder;

namespace {

struct Plant {
  Topology topo;
  SidRegistry reg;
  TrafficCatalog catalog = TrafficCatalog::defaults();
  OerController oerc;
  Awdc awdc;
  SignalingLog log;
  MobileControlPlane mcp;

  Plant(Topology t, ControlPlaneConfig cfg = {})
      : topo(std::move(t)),
        reg(SidRegistry::from_topology(topo)),
        oerc({&topo, &reg, &catalog, Micros{2000}}),
        awdc(&topo, &reg),
        mcp(oerc, awdc, log, cfg) {}
};

std::vector<std::string> prefixed(const std::vector<std::string>& steps, const std::string& p) {
  std::vector<std::string> out;
  for (const auto& s : steps)
    if (s.rfind(p, 0) == 0) out.push_back(s);
  return out;
}

Packet dl_packet(int id) {
  Packet p;
  p.packet_id = id;
  p.direction = Direction::DL;
  p.ue_id = "ue-1";
  return p;
}

}  // namespace

TEST(Attach, FollowsTheAttachProcedure) {
  Plant p(fixtures::ref5());
  const auto& s = p.mcp.attach("ue-1", "cu-1", {{5, 0, {}}}, Micros{0});
  EXPECT_EQ(s.state, SessionState::Active);
  EXPECT_EQ(s.serving_upf, "upf-1");
  EXPECT_EQ(s.bearers.at(0).ec_element, "ec-1");
  EXPECT_TRUE(s.bearers.at(0).stacks.complete());
  const std::vector<std::string> order = {
      "OER.1 AttachRequest", "OER.2 QosPolicy",   "OER.3 SliceSelectRequest", "OER.4 OerRequest",
      "OER.5 OerResponse",   "OER.8 PathResponse", "OER.9 SessionUpdate",     "OER.10 UpfStackInstall",
      "OER.11 UlStackInstall", "OER.12 SessionActive"};
  EXPECT_TRUE(is_subsequence(order, p.log.steps("ue-1")));
}

TEST(Attach, InfeasibleBearerLeavesNoSession) {
  Plant p(fixtures::scenario("no_feasible_path").topology);
  try {
    p.mcp.attach("ue-1", "cu-1", {{5, 0, {}}}, Micros{0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AttachFailed);
  }
  EXPECT_EQ(p.mcp.find_session("ue-1"), nullptr);
  EXPECT_EQ(p.log.steps("ue-1").back(), "OER.12 AttachReject");
  EXPECT_NO_THROW(p.mcp.attach("ue-1", "cu-1", {{9, 1, {}}}, Micros{0}));
}

TEST(Attach, UnknownQfiFallsBackToTheMap) {
  Plant p(fixtures::ref5());
  const auto& s = p.mcp.attach("ue-1", "cu-2", {{9, {}, {}}}, Micros{0});
  EXPECT_EQ(s.bearers.at(0).class_id, 1);
}

TEST(Handover, KeepsTheAddressAndMovesTheAnchor) {
  Plant p(fixtures::ref5());
  const std::string ip = p.mcp.attach("ue-1", "cu-1", {{9, 1, {}}}, Micros{0}).ue_ip;
  const auto& s = p.mcp.handover("ue-1", "cu-2", from_ms(100));
  EXPECT_EQ(s.ue_ip, ip);
  EXPECT_EQ(s.serving_cu, "cu-2");
  EXPECT_EQ(s.serving_upf, "upf-2");
  EXPECT_EQ(s.state, SessionState::Active);
  EXPECT_EQ(p.mcp.observed_ips().at("ue-1"), std::set<std::string>{ip});
  const auto* plan = p.mcp.last_handover("ue-1");
  ASSERT_NE(plan, nullptr);
  EXPECT_EQ(plan->interruption(), from_ms(8));
  EXPECT_TRUE(is_subsequence({"MER.1 MeasurementReport", "MER.5 UeAttach", "MER.8 OerRequest",
                              "MER.9 OerResponse", "MER.12 UpfUpdate", "MER.13 UlStackUpdate"},
                             p.log.steps("ue-1")));
}

TEST(Handover, SameCuIsAPreconditionViolation) {
  Plant p(fixtures::ref5());
  p.mcp.attach("ue-1", "cu-1", {{9, 1, {}}}, Micros{0});
  try {
    p.mcp.begin_handover("ue-1", "cu-1", from_ms(10));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PreconditionViolation);
  }
}

TEST(Handover, BufferKeepsArrivalOrder) {
  Plant p(fixtures::ref5());
  p.mcp.attach("ue-1", "cu-1", {{9, 1, {}}}, Micros{0});
  p.mcp.begin_handover("ue-1", "cu-2", from_ms(100));
  ASSERT_NE(p.mcp.pending("ue-1"), nullptr);
  p.mcp.open_window("ue-1", from_ms(104));
  EXPECT_EQ(p.mcp.session("ue-1").state, SessionState::HandingOver);
  for (int i = 1; i <= 5; ++i) ASSERT_TRUE(p.mcp.buffer_dl("ue-1", dl_packet(i)));
  EXPECT_EQ(p.mcp.buffered("ue-1"), 5u);
  const auto out = p.mcp.complete_handover("ue-1", from_ms(112));
  ASSERT_EQ(out.size(), 5u);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(out[i].packet_id, i + 1);
  EXPECT_EQ(p.mcp.buffered("ue-1"), 0u);
}

TEST(Handover, FiniteBufferRejectsOverflow) {
  ControlPlaneConfig cfg;
  cfg.ho_buffer_limit = 1;
  Plant p(fixtures::ref5(), cfg);
  p.mcp.attach("ue-1", "cu-1", {{9, 1, {}}}, Micros{0});
  p.mcp.begin_handover("ue-1", "cu-2", from_ms(100));
  p.mcp.open_window("ue-1", from_ms(104));
  EXPECT_TRUE(p.mcp.buffer_dl("ue-1", dl_packet(1)));
  EXPECT_FALSE(p.mcp.buffer_dl("ue-1", dl_packet(2)));
  EXPECT_EQ(p.mcp.complete_handover("ue-1", from_ms(112)).size(), 1u);
}

TEST(Handover, WithoutRelocationAnUnreachableBoundCancels) {
  Plant p(fixtures::scenario("awr_reactive").topology);
  const UeSession before = p.mcp.attach("ue-1", "cu-a", {{5, 0, {}}}, Micros{0});
  try {
    p.mcp.begin_handover("ue-1", "cu-b", from_ms(100));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::HandoverFailed);
  }
  const auto& after = p.mcp.session("ue-1");
  EXPECT_EQ(after.serving_cu, before.serving_cu);
  EXPECT_EQ(after.serving_upf, before.serving_upf);
  EXPECT_EQ(after.state, SessionState::Active);
  EXPECT_EQ(after.bearers.at(0).stacks, before.bearers.at(0).stacks);
  EXPECT_EQ(p.log.steps("ue-1").back(), "MER.10 HandoverCancel");
}

TEST(Handover, ReactiveRelocationCostsTheReplicationTime) {
  ControlPlaneConfig cfg;
  cfg.awr_mode = AwrMode::Reactive;
  Plant p(fixtures::scenario("awr_reactive").topology, cfg);
  p.mcp.attach("ue-1", "cu-a", {{5, 0, {}}}, Micros{0});
  const auto& s = p.mcp.handover("ue-1", "cu-b", from_ms(100));
  EXPECT_EQ(s.bearers.at(0).ec_element, "ec-b");
  EXPECT_EQ(p.mcp.last_handover("ue-1")->interruption(), from_ms(23));
  EXPECT_FALSE(prefixed(p.log.steps("ue-1"), "AWR.").empty());
  EXPECT_EQ(p.awdc.live(bearer_app(s.bearers.at(0)), "ue-1")->ec_element, "ec-b");
}

TEST(Handover, PredictiveReplicaHidesTheTransfer) {
  ControlPlaneConfig cfg;
  cfg.awr_mode = AwrMode::Predictive;
  Plant p(fixtures::scenario("awr_predictive").topology, cfg);
  p.mcp.attach("ue-1", "cu-a", {{5, 0, {}}}, Micros{0});
  std::vector<int> started;
  for (auto [t, h] : {std::pair{100.0, 10.0}, {200.0, 7.0}, {300.0, 4.0}}) {
    auto ids = p.mcp.on_mobility_sample({"ue-1", from_ms(t), "edc-a", h, "edc-b"}, from_ms(t));
    started.insert(started.end(), ids.begin(), ids.end());
  }
  ASSERT_EQ(started.size(), 1u);
  p.mcp.handover("ue-1", "cu-b", from_ms(400));
  const auto* plan = p.mcp.last_handover("ue-1");
  EXPECT_EQ(plan->interruption(), from_ms(8));
  EXPECT_EQ(plan->prediction_hits, 1);
  EXPECT_TRUE(plan->mispredicted.empty());
}

TEST(XnStack, TargetsTheNewCu) {
  const Topology topo = fixtures::ref5();
  const auto reg = SidRegistry::from_topology(topo);
  EXPECT_EQ(xn_stack(reg, "cu-2"), SegmentList{SegmentId::node(1220)});
}
