#include <gtest/gtest.h>

#include "crashsearch/bicycle.hpp"
#include "crashsearch/idm.hpp"
#include "crashsearch/rng.hpp"
#include "test_util.hpp"

using namespace crashsearch;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Independent one-line evaluation of the IDM closed form.
double idm_oracle(const IdmParams& p, double v, double gap, double dv) {
  const double s_star =
      p.min_gap + v * p.time_headway +
      v * dv / (2.0 * std::sqrt(p.max_accel * p.comfort_decel));
  const double raw = p.max_accel * (1.0 - std::pow(v / p.desired_speed, p.exponent) -
                                    (std::isfinite(gap) ? (s_star / gap) * (s_star / gap)
                                                        : 0.0));
  return std::clamp(raw, -9.0, p.max_accel);
}
} // namespace

TEST(Idm, FreeRoadAtDesiredSpeedIsZero) {
  IdmParams p;
  EXPECT_NEAR(idm_acceleration(p, p.desired_speed, kInf, 0.0), 0.0, 1e-12);
}

TEST(Idm, StandstillAtMinGapHoldsPosition) {
  IdmParams p;
  EXPECT_NEAR(idm_acceleration(p, 0.0, p.min_gap, 0.0), 0.0, 1e-12);
}

TEST(Idm, MatchesClosedFormOracle) {
  IdmParams p{15.0, 1.5, 2.0, 1.5, 2.0, 4.0};
  EXPECT_NEAR(idm_acceleration(p, 10.0, 30.0, 5.0, 9.0), idm_oracle(p, 10, 30, 5), 1e-9);

  SplitMix64 rng(99);
  for (int i = 0; i < 200; ++i) {
    const double v = rng.uniform(0.0, 30.0);
    const double gap = rng.next_double() < 0.1 ? kInf : rng.uniform(0.5, 200.0);
    const double dv = std::isfinite(gap) ? rng.uniform(-10.0, 10.0) : 0.0;
    EXPECT_NEAR(idm_acceleration(p, v, gap, dv, 9.0), idm_oracle(p, v, gap, dv), 1e-9);
  }
}

TEST(Idm, RejectsNonPositiveGap) {
  IdmParams p;
  EXPECT_THROW(idm_acceleration(p, 5.0, 0.0, 0.0), std::domain_error);
  EXPECT_THROW(idm_acceleration(p, 5.0, -1.0, 0.0), std::domain_error);
}

TEST(Idm, MonotoneSweep) {
  IdmParams p;
  for (double dv : {0.0, 2.0}) {
    for (int i = 0; i < 20; ++i) {
      for (int j = 0; j < 20; ++j) {
        const double v = 1.0 + i * 1.4;
        const double gap = 5.0 + j * 10.0;
        // non-increasing in v
        EXPECT_LE(idm_acceleration(p, v + 1.0, gap, dv), idm_acceleration(p, v, gap, dv) + 1e-12);
        // non-decreasing in gap
        EXPECT_GE(idm_acceleration(p, v, gap + 5.0, dv), idm_acceleration(p, v, gap, dv) - 1e-12);
      }
    }
  }
}

TEST(Bicycle, StraightLineAdvance) {
  VehicleState s;
  s.speed = 10.0;
  const VehicleSpec spec = default_spec(VehicleClass::car);
  const VehicleState out = bicycle_step(s, spec, {0.0, 0.0}, 0.1);
  EXPECT_DOUBLE_EQ(out.position.x, 1.0);
  EXPECT_DOUBLE_EQ(out.position.y, 0.0);
  EXPECT_DOUBLE_EQ(out.heading, 0.0);
  EXPECT_DOUBLE_EQ(out.speed, 10.0);
  EXPECT_DOUBLE_EQ(out.odometer, 1.0);
}

TEST(Bicycle, NoReverseMotion) {
  VehicleState s;
  s.speed = 0.0;
  const VehicleState out = bicycle_step(s, default_spec(VehicleClass::car), {0.0, -3.0}, 0.1);
  EXPECT_DOUBLE_EQ(out.speed, 0.0);
  EXPECT_DOUBLE_EQ(out.position.x, 0.0);
}

TEST(Bicycle, HeadingIncrementOracle) {
  VehicleState s;
  s.speed = 10.0;
  VehicleSpec spec = default_spec(VehicleClass::car);
  spec.wheelbase = 2.5;
  const VehicleState out = bicycle_step(s, spec, {0.1, 0.0}, 0.1);
  const double expected = (10.0 / 2.5) * std::tan(0.1) * 0.1;
  EXPECT_NEAR(out.heading, expected, 1e-12);
}

TEST(Bicycle, RandomizedClosedFormOracle) {
  // Independent evaluation of the documented scheme: mean speed, exact arc.
  const VehicleSpec spec = default_spec(VehicleClass::car);
  SplitMix64 rng(5);
  for (int i = 0; i < 150; ++i) {
    VehicleState s;
    s.position = {rng.uniform(-50, 50), rng.uniform(-50, 50)};
    s.heading = rng.uniform(-kPi, kPi);
    s.speed = rng.uniform(0.5, 30.0);
    const double steer = rng.uniform(-0.5, 0.5);
    const double accel = rng.uniform(-4.0, 2.9);
    const double dt = 0.1;
    const VehicleState out = bicycle_step(s, spec, {steer, accel}, dt);

    const double v1 = std::max(0.0, s.speed + accel * dt);
    const double vm = 0.5 * (s.speed + v1);
    const double dpsi = vm / spec.wheelbase * std::tan(steer) * dt;
    const double half = 0.5 * dpsi;
    const double sinc = std::abs(half) < 1e-8 ? 1.0 - half * half / 6.0 : std::sin(half) / half;
    EXPECT_NEAR(out.position.x, s.position.x + vm * dt * sinc * std::cos(s.heading + half), 1e-9);
    EXPECT_NEAR(out.position.y, s.position.y + vm * dt * sinc * std::sin(s.heading + half), 1e-9);
    EXPECT_NEAR(out.heading, wrap_angle(s.heading + dpsi), 1e-9);
    EXPECT_NEAR(out.speed, v1, 1e-12);
  }
}

TEST(Bicycle, ConservationProperties) {
  const VehicleSpec spec = default_spec(VehicleClass::car);
  VehicleState s;
  s.heading = 0.7;
  s.speed = 12.0;
  // zero steer conserves heading exactly
  VehicleState out = bicycle_step(s, spec, {0.0, 1.5}, 0.1);
  EXPECT_DOUBLE_EQ(out.heading, 0.7);
  // zero accel conserves speed exactly
  out = bicycle_step(s, spec, {0.2, 0.0}, 0.1);
  EXPECT_DOUBLE_EQ(out.speed, 12.0);
}

TEST(Bicycle, HalfStepComposition) {
  const VehicleSpec spec = default_spec(VehicleClass::car);
  for (double v : {1.0, 5.0, 15.0, 30.0}) {
    for (double steer : {-0.3, -0.1, 0.0, 0.15, 0.3}) {
      for (double accel : {-8.0, -2.0, 0.0, 2.0}) {
        VehicleState s;
        s.heading = 0.3;
        s.speed = v;
        const ControlInput u{steer, accel};
        const VehicleState full = bicycle_step(s, spec, u, 0.1);
        const VehicleState halves = bicycle_step(bicycle_step(s, spec, u, 0.05), spec, u, 0.05);
        EXPECT_NEAR(full.position.x, halves.position.x, 1e-3);
        EXPECT_NEAR(full.position.y, halves.position.y, 1e-3);
        EXPECT_NEAR(full.heading, halves.heading, 1e-4);
      }
    }
  }
}

TEST(ActionGrid, DefaultHas25Actions) {
  const ActionGrid grid = build_action_grid();
  EXPECT_EQ(grid.size(), 25u);
  EXPECT_DOUBLE_EQ(grid.at(0).steer, -0.3);
  EXPECT_DOUBLE_EQ(grid.at(0).accel, -8.0);
  EXPECT_DOUBLE_EQ(grid.at(24).steer, 0.3);
  EXPECT_DOUBLE_EQ(grid.at(24).accel, 2.0);
}

TEST(ActionGrid, DegenerateCoastGrid) {
  const ActionGrid grid = build_action_grid({{0.0}, {0.0}});
  EXPECT_EQ(grid.size(), 1u);
  EXPECT_DOUBLE_EQ(grid.at(0).steer, 0.0);
  EXPECT_DOUBLE_EQ(grid.at(0).accel, 0.0);
}

TEST(ActionGrid, NonMonotoneRejected) {
  EXPECT_THROW(build_action_grid({{0.3, -0.3, 0.0}, {0.0}}), ConfigError);
  EXPECT_THROW(build_action_grid({{0.0}, {}}), ConfigError);
  // asymmetric steer list
  EXPECT_THROW(build_action_grid({{-0.2, 0.0, 0.3}, {0.0}}), ConfigError);
}

TEST(DefaultPolicy, EquilibriumAloneOnStraightLane) {
  auto net = testutil::straight_network(13.9);
  IdmParams idm;
  idm.desired_speed = 13.9;
  Agent a = testutil::place_agent(*net, 1, "main_l0", 50.0, 0.0, 13.9);
  a.idm = idm;
  WorldState w = testutil::make_world(net, {a});
  const ControlInput u = default_policy(w, 1);
  EXPECT_NEAR(u.steer, 0.0, 1e-9);
  EXPECT_NEAR(u.accel, 0.0, 1e-9);
}

TEST(DefaultPolicy, BrakesForDeceleratingLeader) {
  auto net = testutil::straight_network();
  Agent follower = testutil::place_agent(*net, 1, "main_l0", 50.0, 0.0, 13.0);
  Agent leader = testutil::place_agent(*net, 2, "main_l0", 70.0, 0.0, 6.0);
  WorldState w = testutil::make_world(net, {follower, leader});
  const ControlInput u = default_policy(w, 1);
  EXPECT_LT(u.accel, 0.0);
}

TEST(DefaultPolicy, SteersRightWhenOffsetLeft) {
  auto net = testutil::straight_network();
  Agent a = testutil::place_agent(*net, 1, "main_l0", 50.0, 0.5, 10.0);
  WorldState w = testutil::make_world(net, {a});
  const ControlInput u = default_policy(w, 1);
  EXPECT_LT(u.steer, 0.0);
}

TEST(DefaultPolicy, OffNetworkAgentBrakesFully) {
  auto net = testutil::straight_network();
  Agent a = testutil::place_agent(*net, 1, "main_l0", 50.0, 0.0, 10.0);
  a.route_pos = 1; // exhausted route
  WorldState w = testutil::make_world(net, {a});
  const ControlInput u = default_policy(w, 1);
  EXPECT_DOUBLE_EQ(u.steer, 0.0);
  EXPECT_DOUBLE_EQ(u.accel, -a.spec.max_decel);
}

TEST(DefaultPolicy, ConvergesToDesiredSpeedWithinSixtySeconds) {
  auto net = testutil::straight_network(13.9);
  // Long loop: re-enter the same lane so 60 s of driving fits.
  auto loop = std::make_shared<RoadNetwork>();
  loop->nodes = {{"a", {0, 0}}, {"b", {10000, 0}}};
  RoadEdge e;
  e.id = "main";
  e.from = "a";
  e.to = "b";
  Lane lane;
  lane.id = "main_l0";
  lane.width = 3.5;
  lane.speed_limit = 13.9;
  lane.centerline = {{0, 0}, {10000, 0}};
  e.lanes.push_back(lane);
  loop->edges.push_back(e);
  loop->finalize();
  auto cnet = std::shared_ptr<const RoadNetwork>(loop);

  Agent a = testutil::place_agent(*cnet, 1, "main_l0", 5.0, 0.8, 0.0);
  WorldState w = testutil::make_world(cnet, {a});
  SimSetup setup;
  for (int i = 0; i < 600; ++i) step(w, std::nullopt, setup);
  ASSERT_EQ(w.agents.size(), 1u);
  const Agent& out = w.agents.at(1);
  EXPECT_NEAR(out.state.speed, 13.9, 0.1);
  EXPECT_NEAR(out.state.pose.d, 0.0, 0.05);
  EXPECT_NEAR(out.state.steer, 0.0, 1e-3);
}
