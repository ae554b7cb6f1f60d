#include <gtest/gtest.h>

#include <algorithm>

#include "support.hpp"
#include "wonder/error.hpp"
#include "wonder/topology_loader.hpp"

using namespace wonder;

namespace {

std::vector<std::string> problems_of(const std::string& text, bool lax = false) {
  try {
    load_topology(text, lax);
  } catch (const ValidationError& e) {
    return e.problems();
  }
  return {};
}

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
  return std::any_of(problems.begin(), problems.end(),
                     [&](const std::string& p) { return p.find(needle) != std::string::npos; });
}

const char* kTwoEdcs = R"({
  "format_version": 1,
  "edcs": [
    {"id": "edc-1", "elements": [
      {"id": "r-1", "type": "FabricRouter"}, {"id": "cu-1", "type": "CU"},
      {"id": "upf-1", "type": "UPF"}, {"id": "ec-1", "type": "EC"}]},
    {"id": "edc-2", "elements": [{"id": "r-2", "type": "FabricRouter"}, {"id": "cu-2", "type": "CU"}]}
  ],
  "links": [LINKS]
})";

std::string two_edcs(const std::string& links) {
  std::string s = kTwoEdcs;
  return s.replace(s.find("LINKS"), 5, links);
}

}  // namespace

TEST(LoadTopology, ReferenceFixture) {
  const Topology t = fixtures::ref5();
  ASSERT_EQ(t.edcs.size(), 5u);
  ASSERT_NE(t.find_edc("edc-5"), nullptr);
  EXPECT_TRUE(t.find_edc("edc-5")->has_ec());
  EXPECT_FALSE(t.find_edc("edc-3")->has_ec());
  EXPECT_EQ(t.elements().size(), 14u);
  EXPECT_EQ(t.links.size(), 10u);
  EXPECT_EQ(t.intra_edc_delay, Micros{50});
  EXPECT_EQ(t.element("cu-1").sid, SegmentId::node(1210));
  EXPECT_EQ(t.element("r-3").sid, SegmentId::node(102));
  const Link* bk = t.find_link("l34-bk");
  ASSERT_NE(bk, nullptr);
  EXPECT_FALSE(bk->admin_up);
  EXPECT_EQ(t.backup_for("l34"), bk);
}

TEST(LoadTopology, DefaultSidsFollowEdcLayout) {
  const Topology t = load_topology(two_edcs(R"({"id": "x", "from": "r-1", "to": "r-2", "delay_ms": 1})"));
  EXPECT_EQ(t.element("cu-1").sid, SegmentId::node(1210));
  EXPECT_EQ(t.element("upf-1").sid, SegmentId::node(1211));
  EXPECT_EQ(t.element("ec-1").sid, SegmentId::node(1212));
  EXPECT_EQ(t.element("cu-2").sid, SegmentId::node(1220));
  EXPECT_EQ(t.element("r-1").sid, SegmentId::node(100));
  EXPECT_EQ(t.element("r-2").sid, SegmentId::node(101));
}

TEST(LoadTopology, NegativeDelayNamesTheLink) {
  auto p = problems_of(two_edcs(R"({"id": "bad-link", "from": "r-1", "to": "r-2", "delay_ms": -1})"));
  ASSERT_FALSE(p.empty());
  EXPECT_TRUE(mentions(p, "bad-link"));
  EXPECT_TRUE(mentions(p, "links[0]"));
}

TEST(LoadTopology, EmptyEdcListIsRejected) {
  auto p = problems_of(R"({"format_version": 1, "edcs": [], "links": []})");
  EXPECT_FALSE(p.empty());
}

TEST(LoadTopology, MecdWithoutEdgeComputeIsRejected) {
  auto p = problems_of(R"({"format_version": 1, "edcs": [
      {"id": "edc-1", "elements": [{"id": "cu-1", "type": "CU"}]}], "links": []})");
  EXPECT_TRUE(mentions(p, "EC"));
}

TEST(LoadTopology, EveryProblemIsReported) {
  auto p = problems_of(two_edcs(
      R"({"id": "a", "from": "r-1", "to": "nowhere", "delay_ms": 1},
         {"id": "b", "from": "r-1", "to": "r-2", "delay_ms": 1, "capacity_gbps": 0})"));
  EXPECT_TRUE(mentions(p, "nowhere"));
  EXPECT_TRUE(mentions(p, "links[1]"));
}

TEST(LoadTopology, DisconnectedTopologyIsRejected) {
  auto p = problems_of(two_edcs(""));
  EXPECT_TRUE(mentions(p, "connect"));
}

TEST(LoadTopology, ProtectedLinkNeedsBackup) {
  auto p = problems_of(
      two_edcs(R"({"id": "p", "from": "r-1", "to": "r-2", "delay_ms": 1, "protected": true})"));
  EXPECT_TRUE(mentions(p, "NoBackup"));
}

TEST(LoadTopology, BackupMustShareEndpoints) {
  auto p = problems_of(two_edcs(
      R"({"id": "p", "from": "r-1", "to": "r-2", "delay_ms": 1, "protected": true},
         {"id": "q", "from": "cu-1", "to": "r-2", "delay_ms": 1, "backup_of": "p"})"));
  EXPECT_TRUE(mentions(p, "links[1]"));
}

TEST(LoadTopology, UnknownKeysFailUnlessLax) {
  const std::string text =
      two_edcs(R"({"id": "x", "from": "r-1", "to": "r-2", "delay_ms": 1, "colour": "red"})");
  EXPECT_TRUE(mentions(problems_of(text), "colour"));
  EXPECT_NO_THROW(load_topology(text, true));
}

TEST(LoadTopology, MalformedJsonIsAParseError) {
  try {
    load_topology("{ not json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
  }
}

TEST(LoadTopology, AppsOnlyOnEdgeCompute) {
  auto p = problems_of(R"({"format_version": 1, "edcs": [{"id": "edc-1", "elements": [
      {"id": "ec-1", "type": "EC"},
      {"id": "cu-1", "type": "CU", "apps": [{"sid": 9100}]}]}], "links": []})");
  EXPECT_TRUE(mentions(p, "only EC"));
}

TEST(LoadTopology, Srv6Prefix) {
  EXPECT_EQ(parse_srv6_prefix("fd00::/32"), 0xfd000000u);
  EXPECT_EQ(parse_srv6_prefix("2001:db8::/32"), 0x20010db8u);
  EXPECT_FALSE(parse_srv6_prefix("fd00::/64"));
}
