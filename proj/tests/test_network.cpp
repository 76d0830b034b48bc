#include <gtest/gtest.h>

#include "crashsearch/fixtures.hpp"
#include "crashsearch/network_json.hpp"
#include "crashsearch/rng.hpp"

using namespace crashsearch;

namespace {

const char* kMinimalLane = R"({
  "version": 1,
  "nodes": [{"id": "a", "x": 0.0, "y": 0.0}, {"id": "b", "x": 100.0, "y": 0.0}],
  "edges": [{"id": "e1", "from": "a", "to": "b",
             "lanes": [{"id": "e1_l0", "width": 3.5, "speed_limit": 13.9,
                        "centerline": [[0.0, 0.0], [100.0, 0.0]], "successors": []}]}]
})";

RoadNetwork straight_lane_network() { return load_network(kMinimalLane); }

} // namespace

TEST(NetworkJson, MinimalDocumentArclength) {
  const RoadNetwork net = straight_lane_network();
  ASSERT_EQ(net.lane_count(), 1u);
  EXPECT_NEAR(net.lane(0).length(), 100.0, 1e-9);
}

TEST(NetworkJson, RoundTripIsCanonicalFixpoint) {
  const RoadNetwork net = straight_lane_network();
  const std::string once = save_network(net);
  const std::string twice = save_network(load_network(once));
  EXPECT_EQ(once, twice);
}

TEST(NetworkJson, BundledFixturesRoundTripByteIdentical) {
  for (const std::string& name : fixture_names()) {
    const RoadNetwork net = make_fixture(name);
    const std::string saved = save_network(net);
    EXPECT_EQ(saved, save_network(load_network(saved))) << name;
  }
}

TEST(NetworkJson, NegativeWidthCitesField) {
  std::string doc = kMinimalLane;
  const auto pos = doc.find("\"width\": 3.5");
  doc.replace(pos, 12, "\"width\": -3");
  try {
    load_network(doc);
    FAIL() << "expected validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("width"), std::string::npos);
  }
}

TEST(NetworkJson, MissingFieldNamesPath) {
  try {
    load_network(R"({"version": 1, "nodes": [{"id": "a", "x": 1}]})");
    FAIL() << "expected schema error";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("$.nodes[0].y"), std::string::npos);
  }
}

TEST(NetworkJson, UnresolvedSuccessorRejected) {
  std::string doc = kMinimalLane;
  const auto pos = doc.find("\"successors\": []");
  doc.replace(pos, 16, "\"successors\": [\"ghost\"]");
  EXPECT_THROW(load_network(doc), ValidationError);
}

TEST(NetworkJson, DuplicateLaneIdRejected) {
  RoadNetwork net = straight_lane_network();
  RoadEdge dup = net.edges[0];
  dup.id = "e2";
  net.edges.push_back(dup); // reuses lane id e1_l0
  EXPECT_THROW(net.finalize(), ValidationError);
}

TEST(Network, DisconnectedComponentsReported) {
  std::string doc = R"({
    "version": 1,
    "nodes": [{"id": "a", "x": 0, "y": 0}, {"id": "b", "x": 10, "y": 0},
              {"id": "c", "x": 0, "y": 500}, {"id": "d", "x": 10, "y": 500}],
    "edges": [
      {"id": "e1", "from": "a", "to": "b",
       "lanes": [{"id": "l1", "width": 3.5, "speed_limit": 10,
                  "centerline": [[0,0],[10,0]], "successors": []}]},
      {"id": "e2", "from": "c", "to": "d",
       "lanes": [{"id": "l2", "width": 3.5, "speed_limit": 10,
                  "centerline": [[0,500],[10,500]], "successors": []}]}
    ]})";
  const RoadNetwork net = load_network(doc);
  EXPECT_EQ(net.report().connected_components, 2);
  EXPECT_FALSE(net.report().warnings.empty());
}

TEST(LocateOnLane, CenterlineAndSignedOffset) {
  const RoadNetwork net = straight_lane_network();
  auto pose = locate_on_lane(net, {50.0, 0.0}, 0.0);
  ASSERT_TRUE(pose.has_value());
  EXPECT_NEAR(pose->d, 0.0, 1e-12);
  EXPECT_NEAR(pose->s, 50.0, 1e-12);

  pose = locate_on_lane(net, {50.0, 1.0}, 0.0); // 1 m left of travel
  ASSERT_TRUE(pose.has_value());
  EXPECT_NEAR(pose->d, 1.0, 1e-12);
}

TEST(LocateOnLane, OffNetworkBeyondCaptureRadius) {
  const RoadNetwork net = straight_lane_network();
  EXPECT_FALSE(locate_on_lane(net, {50.0, 30.0}, 0.0).has_value());
  EXPECT_TRUE(locate_on_lane(net, {50.0, 9.0}, 0.0).has_value());
}

TEST(LocateOnLane, HeadingFilterPicksCodirectionalLane) {
  // Two parallel opposing lanes; the query point sits exactly between them.
  std::string doc = R"({
    "version": 1,
    "nodes": [{"id": "a", "x": 0, "y": 0}, {"id": "b", "x": 100, "y": 0}],
    "edges": [
      {"id": "east", "from": "a", "to": "b",
       "lanes": [{"id": "east_l0", "width": 3.5, "speed_limit": 10,
                  "centerline": [[0,-1.75],[100,-1.75]], "successors": []}]},
      {"id": "west", "from": "b", "to": "a",
       "lanes": [{"id": "west_l0", "width": 3.5, "speed_limit": 10,
                  "centerline": [[100,1.75],[0,1.75]], "successors": []}]}
    ]})";
  const RoadNetwork net = load_network(doc);
  const auto east = locate_on_lane(net, {50.0, 0.0}, 0.0);
  ASSERT_TRUE(east.has_value());
  EXPECT_EQ(east->lane_id, "east_l0");
  const auto west = locate_on_lane(net, {50.0, 0.0}, kPi);
  ASSERT_TRUE(west.has_value());
  EXPECT_EQ(west->lane_id, "west_l0");
}

TEST(LocateOnLane, PointAtRoundTrip) {
  const RoadNetwork net = straight_lane_network();
  SplitMix64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const double s = rng.uniform(1.0, 99.0);
    const double d = rng.uniform(-1.7, 1.7); // |d| < width/2
    const Vec2 p = point_at(net, "e1_l0", s, d);
    const auto pose = locate_on_lane(net, p, 0.0);
    ASSERT_TRUE(pose.has_value());
    EXPECT_EQ(pose->lane_id, "e1_l0");
    EXPECT_NEAR(pose->s, s, 1e-6);
    EXPECT_NEAR(pose->d, d, 1e-6);
  }
}

TEST(Network, FixturesValidateAndConnect) {
  for (const std::string& name : fixture_names()) {
    const RoadNetwork net = make_fixture(name);
    EXPECT_TRUE(net.finalized()) << name;
    EXPECT_GE(net.lane_count(), 2u) << name;
    EXPECT_FALSE(net.entry_lanes().empty()) << name;
    EXPECT_FALSE(net.exit_lanes().empty()) << name;
  }
}

TEST(Network, IntersectionHasCrossingConflicts) {
  const RoadNetwork net = make_cross_intersection();
  // The two straight-through connectors of perpendicular arms must conflict.
  const auto ew = net.lane_index("c_e_straight_l0");
  const auto ns = net.lane_index("c_n_straight_l0");
  ASSERT_TRUE(ew && ns);
  bool found = false;
  for (const LaneConflict& c : net.conflicts_of(*ew)) {
    if (c.other == *ns) found = true;
  }
  EXPECT_TRUE(found);
  // Opposing straight connectors run parallel 3.5 m apart: no conflict.
  const auto we = net.lane_index("c_w_straight_l0");
  for (const LaneConflict& c : net.conflicts_of(*ew)) {
    EXPECT_NE(c.other, *we);
  }
}
