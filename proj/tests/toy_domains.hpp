#ifndef CRASHSEARCH_TOY_DOMAINS_HPP
#define CRASHSEARCH_TOY_DOMAINS_HPP

#include <cmath>
#include <vector>

#include "crashsearch/mcts.hpp"
#include "crashsearch/rng.hpp"

namespace crashsearch::testutil {

/// Depth-1 bandit MDP for exercising the engine's selection rules. Arms pay
/// through one of three schemes; all randomness sits in the state so replay
/// modes stay equivalent.
struct BanditArm {
  enum class Kind { fixed, bernoulli, two_point };
  Kind kind = Kind::fixed;
  double a = 0.0; // fixed value / success probability / low payout
  double b = 0.0; // high payout for two_point
};

inline BanditArm fixed_arm(double v) { return {BanditArm::Kind::fixed, v, 0.0}; }
inline BanditArm bernoulli_arm(double p) { return {BanditArm::Kind::bernoulli, p, 0.0}; }
inline BanditArm two_point_arm(double lo, double hi) {
  return {BanditArm::Kind::two_point, lo, hi};
}

struct BanditState {
  SplitMix64 rng;
  bool done = false;
};

class BanditDomain {
 public:
  using State = BanditState;

  explicit BanditDomain(std::vector<BanditArm> arms) : arms_(std::move(arms)) {}

  int action_count() const { return static_cast<int>(arms_.size()); }
  bool is_terminal(const State& s) const { return s.done; }

  ApplyResult apply(State& s, int action, bool /*record*/) {
    const BanditArm& arm = arms_[static_cast<size_t>(action)];
    double reward = 0.0;
    switch (arm.kind) {
      case BanditArm::Kind::fixed: reward = arm.a; break;
      case BanditArm::Kind::bernoulli: reward = s.rng.next_double() < arm.a ? 1.0 : 0.0; break;
      case BanditArm::Kind::two_point: reward = s.rng.next_double() < 0.5 ? arm.a : arm.b; break;
    }
    s.done = true;
    return {reward, 1.0, true};
  }

  double rollout(State&) { return 0.0; }

 private:
  std::vector<BanditArm> arms_;
};

} // namespace crashsearch::testutil

#endif
