#ifndef CRASHSEARCH_TEST_UTIL_HPP
#define CRASHSEARCH_TEST_UTIL_HPP

#include <memory>

#include "crashsearch/network_json.hpp"
#include "crashsearch/sim.hpp"

namespace crashsearch::testutil {

/// 300 m straight single lane "main_l0" along +x at y=0, limit 13.9 m/s.
inline std::shared_ptr<const RoadNetwork> straight_network(double speed_limit = 13.9) {
  auto net = std::make_shared<RoadNetwork>();
  net->nodes = {{"a", {0, 0}}, {"b", {300, 0}}};
  RoadEdge e;
  e.id = "main";
  e.from = "a";
  e.to = "b";
  Lane lane;
  lane.id = "main_l0";
  lane.width = 3.5;
  lane.speed_limit = speed_limit;
  lane.centerline = {{0, 0}, {300, 0}};
  e.lanes.push_back(lane);
  net->edges.push_back(e);
  net->finalize();
  return net;
}

/// Places an agent on the lane `lane_id` at arclength s, offset d, with the
/// lane-aligned heading.
inline Agent place_agent(const RoadNetwork& net, AgentId id, const LaneId& lane_id,
                         double s, double d, double speed,
                         VehicleClass cls = VehicleClass::car) {
  Agent a;
  a.id = id;
  a.spec = default_spec(cls);
  a.state.position = point_at(net, lane_id, s, d);
  a.state.heading = net.find_lane(lane_id)->heading_at(s);
  a.state.speed = speed;
  a.state.pose = {lane_id, s, d};
  a.route = {lane_id};
  a.route_pos = 0;
  return a;
}

inline WorldState make_world(std::shared_ptr<const RoadNetwork> net,
                             std::vector<Agent> agents, AgentId target = -1,
                             uint64_t seed = 1) {
  WorldState w;
  w.network = std::move(net);
  w.rng = SplitMix64(seed);
  for (Agent& a : agents) {
    sim_detail::refresh_pose(a, *w.network);
    w.agents.emplace(a.id, std::move(a));
  }
  w.target_id = target;
  return w;
}

} // namespace crashsearch::testutil

#endif
