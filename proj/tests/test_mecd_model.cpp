#include <gtest/gtest.h>

#include "support.hpp"
#include "wonder/error.hpp"
#include "wonder/mecd_model.hpp"
#include "wonder/topology_loader.hpp"

using namespace wonder;

namespace {

ElementRecord element(std::string id, ElementType type, SegmentId sid, std::string edc,
                      std::vector<SegmentId> apps = {}) {
  return {std::move(id), type, sid, std::move(edc), "default", std::move(apps)};
}

// edc-1 holds cu-1; ec-5a is 1.0 ms away from it and ec-5b 2.5 ms.
Topology anycast_topology() {
  return load_topology(R"({
    "format_version": 1,
    "edcs": [
      {"id": "edc-1", "elements": [
        {"id": "r-1", "type": "FabricRouter", "sid": 100},
        {"id": "cu-1", "type": "CU", "sid": 1210}]},
      {"id": "edc-5", "elements": [
        {"id": "r-5", "type": "FabricRouter", "sid": 101},
        {"id": "ec-5a", "type": "EC", "sid": 1250, "apps": [{"sid": 9000, "kind": "anycast"}]}]},
      {"id": "edc-6", "elements": [
        {"id": "r-6", "type": "FabricRouter", "sid": 102},
        {"id": "ec-5b", "type": "EC", "sid": 1260, "apps": [{"sid": 9000, "kind": "anycast"}]}]}
    ],
    "links": [
      {"id": "a", "from": "r-1", "to": "r-5", "delay_ms": 0.9},
      {"id": "b", "from": "r-1", "to": "r-6", "delay_ms": 2.4}
    ]
  })");
}

}  // namespace

TEST(SidRegistry, RegisteredNodeSidResolvesToItsElement) {
  SidRegistry reg({"edc-1"});
  reg.register_element(element("cu-1", ElementType::CU, SegmentId::node(1210), "edc-1"));
  ASSERT_EQ(reg.bound_elements(SegmentId::node(1210)), std::vector<std::string>{"cu-1"});
  const auto* rec = reg.record("cu-1");
  ASSERT_NE(rec, nullptr);
  EXPECT_EQ(rec->element_type, ElementType::CU);
  EXPECT_EQ(rec->edc_id, "edc-1");
}

TEST(SidRegistry, RegistrationIsIdempotent) {
  SidRegistry reg({"edc-1"});
  const auto cu = element("cu-1", ElementType::CU, SegmentId::node(1210), "edc-1");
  reg.register_element(cu);
  const SidRegistry once = reg;
  reg.register_element(cu);
  EXPECT_EQ(reg, once);
}

TEST(SidRegistry, AnycastSidBindsEveryInstance) {
  SidRegistry reg({"edc-5"});
  reg.register_element(
      element("ec-5a", ElementType::EC, SegmentId::node(1250), "edc-5", {SegmentId::anycast(9000)}));
  reg.register_element(
      element("ec-5b", ElementType::EC, SegmentId::node(1251), "edc-5", {SegmentId::anycast(9000)}));
  EXPECT_EQ(reg.bound_elements(SegmentId::anycast(9000)),
            (std::vector<std::string>{"ec-5a", "ec-5b"}));
}

TEST(SidRegistry, DuplicateNodeSidIsRejectedAndLeavesRegistryUnchanged) {
  SidRegistry reg({"edc-1"});
  reg.register_element(element("cu-1", ElementType::CU, SegmentId::node(1210), "edc-1"));
  const SidRegistry before = reg;
  try {
    reg.register_element(element("cu-2", ElementType::CU, SegmentId::node(1210), "edc-1"));
    FAIL() << "expected DuplicateSid";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DuplicateSid);
  }
  EXPECT_EQ(reg, before);
}

TEST(SidRegistry, UnknownEdcIsRejected) {
  SidRegistry reg({"edc-1"});
  try {
    reg.register_element(element("cu-9", ElementType::CU, SegmentId::node(1290), "edc-9"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownEdc);
  }
}

TEST(ResolveSid, NodeSidResolvesFromAnywhere) {
  const Topology topo = fixtures::ref5();
  const auto reg = SidRegistry::from_topology(topo);
  for (const auto* e : topo.elements())
    EXPECT_EQ(resolve_sid(reg, topo, SegmentId::node(1210), e->element_id), "cu-1");
}

TEST(ResolveSid, AnycastPicksNearestInstance) {
  const Topology topo = anycast_topology();
  const auto reg = SidRegistry::from_topology(topo);
  EXPECT_EQ(resolve_sid(reg, topo, SegmentId::anycast(9000), "cu-1"), "ec-5a");
}

TEST(ResolveSid, AnycastSkipsUnreachableInstance) {
  Topology topo = anycast_topology();
  topo.find_link("a")->admin_up = false;
  const auto reg = SidRegistry::from_topology(topo);
  EXPECT_EQ(resolve_sid(reg, topo, SegmentId::anycast(9000), "cu-1"), "ec-5b");
}

TEST(ResolveSid, UnknownSid) {
  const Topology topo = fixtures::ref5();
  const auto reg = SidRegistry::from_topology(topo);
  try {
    resolve_sid(reg, topo, SegmentId::node(4242), "cu-1");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownSid);
  }
}

TEST(SegmentId, Srv6FormIsDeterministicAndInvertible) {
  const std::uint32_t tag = 0xfd000000;
  for (std::uint32_t v : {0u, 100u, 1210u, 9000u, 0xFFFFFFFFu}) {
    const auto a = SegmentId::node(v).to_srv6(tag);
    EXPECT_EQ(a, SegmentId::app(v).to_srv6(tag));
    EXPECT_EQ(SegmentId::value_from_srv6(a, tag), v);
  }
  EXPECT_EQ(format_srv6(SegmentId::node(1210).to_srv6(tag)), "fd00:0:0:0:0:0:0:4ba");
}

TEST(SegmentId, DefaultLayout) {
  EXPECT_EQ(default_node_sid(1, 0), SegmentId::node(1210));
  EXPECT_EQ(default_node_sid(5, 0), SegmentId::node(1250));
  EXPECT_EQ(default_node_sid(2, 1), SegmentId::node(1221));
}
