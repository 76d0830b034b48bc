#include <gtest/gtest.h>

#include "crashsearch/network_json.hpp"
#include "crashsearch/osm_import.hpp"

using namespace crashsearch;

namespace {

const char* kTwoNodeResidential = R"(<?xml version="1.0" encoding="UTF-8"?>
<osm version="0.6">
  <node id="1" lat="22.3000" lon="114.1700"/>
  <node id="2" lat="22.3010" lon="114.1700"/>
  <way id="10">
    <nd ref="1"/>
    <nd ref="2"/>
    <tag k="highway" v="residential"/>
  </way>
</osm>
)";

} // namespace

TEST(OsmImport, TwoWayResidentialMakesTwoEdgesTwoLanes) {
  const RoadNetwork net = parse_osm_subset(kTwoNodeResidential);
  EXPECT_EQ(net.nodes.size(), 2u);
  EXPECT_EQ(net.edges.size(), 2u);
  EXPECT_EQ(net.lane_count(), 2u);
  // residential default speed
  EXPECT_NEAR(net.lane(0).speed_limit, 13.9, 1e-9);
  // ~111 m between the nodes
  EXPECT_NEAR(net.lane(0).length(), 111.2, 1.0);
}

TEST(OsmImport, NoHighwayTagIsEmptyNetworkError) {
  const char* doc = R"(<osm>
    <node id="1" lat="22.0" lon="114.0"/>
    <node id="2" lat="22.001" lon="114.0"/>
    <way id="10"><nd ref="1"/><nd ref="2"/><tag k="waterway" v="canal"/></way>
  </osm>)";
  EXPECT_THROW(parse_osm_subset(doc), OsmImportError);
}

TEST(OsmImport, OneWayThreeLaneOffsets) {
  const char* doc = R"(<osm>
    <node id="1" lat="22.3000" lon="114.1700"/>
    <node id="2" lat="22.3000" lon="114.1710"/>
    <node id="3" lat="22.3000" lon="114.1720"/>
    <way id="7">
      <nd ref="1"/><nd ref="2"/><nd ref="3"/>
      <tag k="highway" v="residential"/>
      <tag k="oneway" v="yes"/>
      <tag k="lanes" v="3"/>
    </way>
  </osm>)";
  const RoadNetwork net = parse_osm_subset(doc);
  EXPECT_EQ(net.edges.size(), 1u);
  ASSERT_EQ(net.lane_count(), 3u);
  for (size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(net.lane(i).centerline.size(), 3u);
  }
  // The way runs east; lanes offset right (south) by whole lane widths.
  const double y0 = net.lane(0).centerline[1].y;
  const double y1 = net.lane(1).centerline[1].y;
  const double y2 = net.lane(2).centerline[1].y;
  EXPECT_NEAR(y0 - y1, 3.5, 1e-6);
  EXPECT_NEAR(y1 - y2, 3.5, 1e-6);
  // Manual offset oracle: lane 0 sits on the way line itself.
  const GeoProjection proj{net.origin->lat, net.origin->lon};
  const Vec2 way_mid = proj.to_local(22.3000, 114.1710);
  EXPECT_NEAR(y0, way_mid.y, 1e-6);
}

TEST(OsmImport, MalformedXmlReportsLineAndColumn) {
  const char* doc = "<osm>\n  <node id=\"1\" lat=\"22\" lon=14/>\n</osm>";
  try {
    parse_osm_subset(doc);
    FAIL() << "expected parse error";
  } catch (const OsmParseError& e) {
    EXPECT_EQ(e.line, 2);
    EXPECT_GT(e.column, 1);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(OsmImport, DanglingNodeRefNamesWay) {
  const char* doc = R"(<osm>
    <node id="1" lat="22.0" lon="114.0"/>
    <way id="99"><nd ref="1"/><nd ref="404"/><tag k="highway" v="primary"/></way>
  </osm>)";
  try {
    parse_osm_subset(doc);
    FAIL() << "expected import error";
  } catch (const OsmImportError& e) {
    EXPECT_NE(std::string(e.what()).find("'99'"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("'404'"), std::string::npos);
  }
}

TEST(OsmImport, MaxspeedParsing) {
  using osm_detail::parse_maxspeed;
  ASSERT_TRUE(parse_maxspeed("50").has_value());
  EXPECT_NEAR(*parse_maxspeed("50"), 50.0 / 3.6, 1e-12);
  EXPECT_NEAR(*parse_maxspeed("50 km/h"), 50.0 / 3.6, 1e-12);
  EXPECT_NEAR(*parse_maxspeed("30 mph"), 30.0 * 0.44704, 1e-12);
  EXPECT_FALSE(parse_maxspeed("walk").has_value());
}

TEST(OsmImport, MotorwayClassDefaultSpeed) {
  const char* doc = R"(<osm>
    <node id="1" lat="22.30" lon="114.17"/>
    <node id="2" lat="22.31" lon="114.17"/>
    <way id="5"><nd ref="1"/><nd ref="2"/>
      <tag k="highway" v="motorway"/><tag k="oneway" v="yes"/></way>
  </osm>)";
  const RoadNetwork net = parse_osm_subset(doc);
  EXPECT_NEAR(net.lane(0).speed_limit, 27.8, 1e-9);
}

TEST(OsmImport, Deterministic) {
  const std::string a = save_network(parse_osm_subset(kTwoNodeResidential));
  const std::string b = save_network(parse_osm_subset(kTwoNodeResidential));
  EXPECT_EQ(a, b);
}

TEST(OsmImport, JunctionConnectorsLinkCrossingWays) {
  // Two ways sharing node 2: a straight east-west street meeting a
  // north-south one at its endpoint.
  const char* doc = R"(<osm>
    <node id="1" lat="22.3000" lon="114.1690"/>
    <node id="2" lat="22.3000" lon="114.1700"/>
    <node id="3" lat="22.3010" lon="114.1700"/>
    <way id="a"><nd ref="1"/><nd ref="2"/><tag k="highway" v="residential"/></way>
    <way id="b"><nd ref="2"/><nd ref="3"/><tag k="highway" v="residential"/></way>
  </osm>)";
  const RoadNetwork net = parse_osm_subset(doc);
  // Forward lane of way a must reach some lane of way b through successors.
  const auto start = net.lane_index("wa_f_l0");
  ASSERT_TRUE(start.has_value());
  std::vector<size_t> stack{*start};
  std::set<size_t> seen;
  bool reached = false;
  while (!stack.empty()) {
    const size_t cur = stack.back();
    stack.pop_back();
    if (!seen.insert(cur).second) continue;
    if (net.lane(cur).id.rfind("wb_f", 0) == 0) reached = true;
    for (size_t nxt : net.successors_of(cur)) stack.push_back(nxt);
  }
  EXPECT_TRUE(reached);
  // Round-trips through the canonical form like any other network.
  const std::string saved = save_network(net);
  EXPECT_EQ(saved, save_network(load_network(saved)));
}
