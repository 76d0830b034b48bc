#ifndef CRASHSEARCH_REWARD_HPP
#define CRASHSEARCH_REWARD_HPP

#include <compare>
#include <map>
#include <span>

#include "crashsearch/metrics.hpp"

namespace crashsearch {

/// Canonical key identifying a collision mode: ordered class pair, 2D grid
/// cell of the impact location, and a bucketed relative heading.
struct CollisionSignature {
  VehicleClass class_lo = VehicleClass::car;
  VehicleClass class_hi = VehicleClass::car;
  long cell_x = 0;
  long cell_y = 0;
  int heading_bucket = 0; // [0, 8)

  auto operator<=>(const CollisionSignature&) const = default;
};

struct RewardConfig {
  double base_collision_reward = 1.0; // R_c
  double diversity_decay = 0.5;       // beta in (0, 1]; 1 disables the bonus
  double w_lon = 0.02;
  double w_lat = 0.02;
  double w_turn = 0.10;
  double w_brake = 0.05;
  double w_speed = 0.02;
  double w_offset = 0.05; // applied to (offset_score - 1)
  double w_ttc = 0.05;
  double w_drac = 0.01;
  double r_min = -1.0;
  double r_max = 1.0;
  double gamma = 0.99;
  double signature_cell_size = 5.0; // m

  void validate() const {
    if (base_collision_reward <= 0) throw ConfigError("base_collision_reward must be > 0");
    if (diversity_decay <= 0 || diversity_decay > 1) {
      throw ConfigError("diversity_decay must be in (0, 1]");
    }
    if (r_min >= r_max) throw ConfigError("reward clip bounds need r_min < r_max");
    if (gamma < 0 || gamma > 1) throw ConfigError("gamma must be in [0, 1]");
    if (signature_cell_size <= 0) throw ConfigError("signature_cell_size must be > 0");
  }
};

inline CollisionSignature collision_signature(const CollisionEvent& event,
                                              double cell_size = 5.0) {
  CollisionSignature sig;
  sig.class_lo = std::min(event.sig_class_a, event.sig_class_b);
  sig.class_hi = std::max(event.sig_class_a, event.sig_class_b);
  sig.cell_x = static_cast<long>(std::floor(event.location.x / cell_size));
  sig.cell_y = static_cast<long>(std::floor(event.location.y / cell_size));
  const double rel = std::abs(wrap_angle(event.relative_heading)); // [0, pi]
  sig.heading_bucket = std::min(7, static_cast<int>(rel / (kPi / 8.0)));
  return sig;
}

/// Occurrence counts of collision signatures. count_and_increment is the one
/// mutation and is indivisible; this is the only structure shared across
/// episodes of an experiment.
class DiversityLedger {
 public:
  /// Returns the count prior to this occurrence and records it.
  int count_and_increment(const CollisionSignature& sig) {
    return counts_[sig]++;
  }
  int count(const CollisionSignature& sig) const {
    auto it = counts_.find(sig);
    return it == counts_.end() ? 0 : it->second;
  }
  size_t distinct() const { return counts_.size(); }
  size_t total() const {
    size_t t = 0;
    for (const auto& [sig, c] : counts_) {
      (void)sig;
      t += static_cast<size_t>(c);
    }
    return t;
  }
  const std::map<CollisionSignature, int>& counts() const { return counts_; }

 private:
  std::map<CollisionSignature, int> counts_;
};

/// Collision reward with diversity bonus: R_c * beta^k for the k-th repeat of
/// a signature. Non-target collisions contribute nothing and leave the
/// ledger untouched.
inline double collision_reward(const CollisionEvent& event, DiversityLedger& ledger,
                               const RewardConfig& cfg) {
  if (!event.target_involved) return 0.0;
  const CollisionSignature sig = collision_signature(event, cfg.signature_cell_size);
  const int prior = ledger.count_and_increment(sig);
  return cfg.base_collision_reward * std::pow(cfg.diversity_decay, prior);
}

struct RewardBreakdown {
  double collision = 0.0;    // >= 0
  double rationality = 0.0;  // <= 0
  double naturalistic = 0.0; // <= 0
  double total = 0.0;        // clipped to [r_min, r_max]
};

/// Evaluation of one executed step: collision reward plus weighted
/// rationality and naturalistic costs, clipped. `world` is the post-step
/// state; `new_events` the collisions appended by this step.
inline RewardBreakdown evaluate(const VehicleState& pre, const VehicleState& post,
                                const ControlInput& control,
                                std::span<const CollisionEvent> new_events,
                                const WorldState& world, DiversityLedger& ledger,
                                const RewardConfig& rcfg, const MetricConfig& mcfg) {
  RewardBreakdown out;
  for (const CollisionEvent& ev : new_events) {
    if (ev.target_involved) {
      out.collision = collision_reward(ev, ledger, rcfg);
      break; // groups are merged; the target appears in at most one
    }
  }

  const Agent* target = world.target();
  const double lane_width = [&] {
    if (target != nullptr) {
      const Lane* lane = world.network->find_lane(target->state.pose.lane_id);
      if (lane != nullptr) return lane->width;
    }
    return 3.5;
  }();
  StepSample sample{control.accel,
                    control.steer,
                    post.speed,
                    post.speed - pre.speed,
                    post.pose.d,
                    lane_width,
                    target != nullptr ? target->spec.wheelbase : 2.7,
                    world.dt};
  const RationalityCosts rc = rationality_costs(std::span(&sample, 1), mcfg);
  out.rationality = rcfg.w_lon * rc.lon_accel_cost + rcfg.w_lat * rc.lat_accel_cost +
                    rcfg.w_turn * rc.sharp_turn_cost +
                    rcfg.w_brake * rc.emergency_brake_cost +
                    rcfg.w_speed * rc.speed_change_cost +
                    rcfg.w_offset * (rc.lateral_offset_score - 1.0);

  out.naturalistic = naturalistic_cost(world, mcfg, rcfg.w_ttc, rcfg.w_drac);
  out.total =
      std::clamp(out.collision + out.rationality + out.naturalistic, rcfg.r_min, rcfg.r_max);
  return out;
}

/// Sum of gamma^(t-1) * r_t.
inline double discounted_return(std::span<const double> rewards, double gamma) {
  double total = 0.0;
  double g = 1.0;
  for (double r : rewards) {
    total += g * r;
    g *= gamma;
  }
  return total;
}

} // namespace crashsearch

#endif // CRASHSEARCH_REWARD_HPP
