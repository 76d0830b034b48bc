#include <gtest/gtest.h>

#include <algorithm>

#include "crashsearch/reward.hpp"
#include "test_util.hpp"

using namespace crashsearch;

namespace {

CollisionEvent make_event(Vec2 location, double rel_heading, VehicleClass a,
                          VehicleClass b, bool target = true) {
  CollisionEvent ev;
  ev.time = 1.0;
  ev.participants = {1, 2};
  ev.location = location;
  ev.relative_heading = rel_heading;
  ev.participant_classes = {a, b};
  ev.target_involved = target;
  ev.sig_class_a = a;
  ev.sig_class_b = b;
  return ev;
}

} // namespace

TEST(Signature, DeterministicAndOrderInvariant) {
  const auto ev = make_event({12.0, -7.0}, 1.0, VehicleClass::car, VehicleClass::truck);
  const auto sig1 = collision_signature(ev);
  const auto sig2 = collision_signature(ev);
  EXPECT_EQ(sig1, sig2);

  auto swapped = ev;
  std::swap(swapped.sig_class_a, swapped.sig_class_b);
  swapped.relative_heading = -ev.relative_heading; // other participant's frame
  EXPECT_EQ(collision_signature(swapped), sig1);
}

TEST(Signature, SeparateCellsSixMetersApart) {
  const auto a = make_event({0.0, 0.0}, 0.5, VehicleClass::car, VehicleClass::car);
  const auto b = make_event({6.0, 0.0}, 0.5, VehicleClass::car, VehicleClass::car);
  EXPECT_NE(collision_signature(a, 5.0), collision_signature(b, 5.0));
}

TEST(Signature, HeadingBucketsInRange) {
  SplitMix64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const auto ev = make_event({rng.uniform(-100, 100), rng.uniform(-100, 100)},
                               rng.uniform(-kPi, kPi), VehicleClass::car,
                               VehicleClass::bicycle);
    const auto sig = collision_signature(ev);
    EXPECT_GE(sig.heading_bucket, 0);
    EXPECT_LT(sig.heading_bucket, 8);
    EXPECT_LE(sig.class_lo, sig.class_hi);
  }
}

TEST(CollisionReward, FreshSignaturePaysBase) {
  DiversityLedger ledger;
  RewardConfig cfg;
  const auto ev = make_event({1, 1}, 0.2, VehicleClass::car, VehicleClass::car);
  EXPECT_DOUBLE_EQ(collision_reward(ev, ledger, cfg), cfg.base_collision_reward);
  EXPECT_EQ(ledger.distinct(), 1u);
}

TEST(CollisionReward, ThirdRepeatDecays) {
  DiversityLedger ledger;
  RewardConfig cfg;
  cfg.diversity_decay = 0.5;
  const auto ev = make_event({1, 1}, 0.2, VehicleClass::car, VehicleClass::car);
  collision_reward(ev, ledger, cfg);
  collision_reward(ev, ledger, cfg);
  EXPECT_DOUBLE_EQ(collision_reward(ev, ledger, cfg), cfg.base_collision_reward * 0.25);
}

TEST(CollisionReward, NonTargetPaysNothing) {
  DiversityLedger ledger;
  const auto ev = make_event({1, 1}, 0.2, VehicleClass::car, VehicleClass::car, false);
  EXPECT_DOUBLE_EQ(collision_reward(ev, ledger, RewardConfig{}), 0.0);
  EXPECT_EQ(ledger.distinct(), 0u);
}

TEST(CollisionReward, DecaySequenceMonotone) {
  DiversityLedger ledger;
  RewardConfig cfg;
  cfg.diversity_decay = 0.7;
  const auto ev = make_event({3, 4}, 1.2, VehicleClass::truck, VehicleClass::car);
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10; ++i) {
    const double r = collision_reward(ev, ledger, cfg);
    EXPECT_LE(r, prev);
    EXPECT_NEAR(r, cfg.base_collision_reward * std::pow(0.7, i), 1e-12);
    prev = r;
  }
}

TEST(Ledger, PermutationIndependentCounts) {
  std::vector<CollisionEvent> events;
  SplitMix64 rng(8);
  for (int i = 0; i < 40; ++i) {
    events.push_back(make_event({rng.uniform(0, 20), rng.uniform(0, 20)},
                                rng.uniform(-kPi, kPi), VehicleClass::car,
                                VehicleClass::car));
  }
  DiversityLedger in_order;
  for (const auto& ev : events) collision_reward(ev, in_order, RewardConfig{});

  std::vector<size_t> perm(events.size());
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), std::mt19937(99));
  DiversityLedger shuffled;
  for (size_t i : perm) collision_reward(events[i], shuffled, RewardConfig{});

  EXPECT_EQ(in_order.counts(), shuffled.counts());
}

namespace {

struct EvalFixture {
  std::shared_ptr<const RoadNetwork> net = testutil::straight_network();
  WorldState world;
  VehicleState pre, post;

  EvalFixture() {
    Agent a = testutil::place_agent(*net, 1, "main_l0", 50.0, 0.0, 10.0);
    world = testutil::make_world(net, {a}, 1);
    pre = world.agents.at(1).state;
    post = pre;
  }
};

} // namespace

TEST(Evaluate, NeutralStepIsZero) {
  EvalFixture f;
  DiversityLedger ledger;
  const RewardBreakdown rb = evaluate(f.pre, f.post, {0.0, 0.0}, {}, f.world, ledger,
                                      RewardConfig{}, MetricConfig{});
  EXPECT_DOUBLE_EQ(rb.collision, 0.0);
  EXPECT_DOUBLE_EQ(rb.rationality, 0.0);
  EXPECT_DOUBLE_EQ(rb.naturalistic, 0.0);
  EXPECT_DOUBLE_EQ(rb.total, 0.0);
}

TEST(Evaluate, FreshCollisionClipsToRMax) {
  EvalFixture f;
  DiversityLedger ledger;
  RewardConfig cfg;
  cfg.base_collision_reward = 5.0; // above r_max
  const std::vector<CollisionEvent> events = {
      make_event({50, 0}, 0.1, VehicleClass::car, VehicleClass::car)};
  const RewardBreakdown rb = evaluate(f.pre, f.post, {0.0, 0.0}, events, f.world, ledger,
                                      cfg, MetricConfig{});
  EXPECT_DOUBLE_EQ(rb.collision, 5.0);
  EXPECT_DOUBLE_EQ(rb.total, cfg.r_max);
}

TEST(Evaluate, ClipFloorPreservesBreakdown) {
  EvalFixture f;
  DiversityLedger ledger;
  RewardConfig cfg;
  cfg.w_lon = 1.0; // exaggerate the cost so the sum crosses r_min
  VehicleState post = f.post;
  post.speed = 9.2;
  const RewardBreakdown rb = evaluate(f.pre, post, {0.0, -8.0}, {}, f.world, ledger, cfg,
                                      MetricConfig{});
  EXPECT_DOUBLE_EQ(rb.total, cfg.r_min);
  EXPECT_LT(rb.rationality, cfg.r_min); // unclipped component survives
}

TEST(Evaluate, TotalAlwaysWithinBoundsComponentsSigned) {
  EvalFixture f;
  DiversityLedger ledger;
  const RewardConfig cfg;
  SplitMix64 rng(12);
  for (int i = 0; i < 200; ++i) {
    VehicleState post = f.post;
    post.speed = rng.uniform(0, 20);
    post.pose.d = rng.uniform(-4, 4);
    const ControlInput u{rng.uniform(-0.5, 0.5), rng.uniform(-9, 3)};
    std::vector<CollisionEvent> events;
    if (rng.next_double() < 0.3) {
      events.push_back(make_event({rng.uniform(0, 100), 0}, rng.uniform(-kPi, kPi),
                                  VehicleClass::car, VehicleClass::car,
                                  rng.next_double() < 0.5));
    }
    const RewardBreakdown rb =
        evaluate(f.pre, post, u, events, f.world, ledger, cfg, MetricConfig{});
    EXPECT_GE(rb.total, cfg.r_min);
    EXPECT_LE(rb.total, cfg.r_max);
    EXPECT_GE(rb.collision, 0.0);
    EXPECT_LE(rb.rationality, 1e-12);
    EXPECT_LE(rb.naturalistic, 1e-12);
  }
}

TEST(DiscountedReturn, DegenerateGammas) {
  const std::vector<double> r = {2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(discounted_return(r, 1.0), 9.0);
  EXPECT_DOUBLE_EQ(discounted_return(r, 0.0), 2.0);
}

TEST(DiscountedReturn, HandComputed) {
  const std::vector<double> ones = {1.0, 1.0, 1.0};
  EXPECT_DOUBLE_EQ(discounted_return(ones, 0.5), 1.75);
}

TEST(DiscountedReturn, Linearity) {
  SplitMix64 rng(5);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> a(10), b(10), sum(10);
    for (int i = 0; i < 10; ++i) {
      a[i] = rng.uniform(-1, 1);
      b[i] = rng.uniform(-1, 1);
      sum[i] = a[i] + b[i];
    }
    const double gamma = rng.next_double();
    EXPECT_NEAR(discounted_return(sum, gamma),
                discounted_return(a, gamma) + discounted_return(b, gamma), 1e-12);
  }
}

TEST(RewardConfig, Validation) {
  RewardConfig cfg;
  cfg.diversity_decay = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = RewardConfig{};
  cfg.r_min = 2.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = RewardConfig{};
  cfg.gamma = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
}
