#ifndef CRASHSEARCH_METRICS_HPP
#define CRASHSEARCH_METRICS_HPP

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

#include "crashsearch/default_policy.hpp"
#include "crashsearch/sim.hpp"

namespace crashsearch {

struct PairKinematics {
  double gap = 0.0; // bumper to bumper along the follower's lane direction
  double follower_speed = 0.0;
  double leader_speed = 0.0;
};

/// gap / closing speed; infinite when the pair is not closing.
inline double time_to_collision(const PairKinematics& pk) {
  if (pk.gap <= 0.0) throw std::domain_error("time_to_collision: gap must be > 0");
  const double closing = pk.follower_speed - pk.leader_speed;
  if (closing <= 0.0) return std::numeric_limits<double>::infinity();
  return pk.gap / closing;
}

/// Deceleration rate to avoid a collision: closing^2 / (2 gap), zero when the
/// gap is opening.
inline double drac(const PairKinematics& pk) {
  if (pk.gap <= 0.0) throw std::domain_error("drac: gap must be > 0");
  const double closing = pk.follower_speed - pk.leader_speed;
  if (closing <= 0.0) return 0.0;
  return closing * closing / (2.0 * pk.gap);
}

struct MetricConfig {
  double alpha_th = 2.5;       // free longitudinal accel magnitude (m/s^2)
  double a_lat_th = 2.0;       // free lateral accel magnitude (m/s^2)
  double kappa_th = 0.1;       // free curvature magnitude (rad/m)
  double b_em = 4.5;           // emergency-brake threshold (m/s^2)
  double w_b = 1.0;            // weight per emergency-brake step
  double speed_change_th = 2.5; // free speed change per second (m/s^2)
  double ttc_th = 3.0;         // s
  double drac_th = 3.5;        // m/s^2
};

/// One step of a trajectory slice as seen by the rationality costs.
struct StepSample {
  double accel = 0.0;      // applied longitudinal command
  double steer = 0.0;      // applied steering angle
  double speed = 0.0;      // speed after the step
  double speed_change = 0.0; // v_after - v_before
  double lateral_offset = 0.0;
  double lane_width = 3.5;
  double wheelbase = 2.7;
  double dt = 0.1;
};

struct RationalityCosts {
  double lon_accel_cost = 0.0;
  double lat_accel_cost = 0.0;
  double sharp_turn_cost = 0.0;
  double emergency_brake_cost = 0.0;
  double speed_change_cost = 0.0;
  double lateral_offset_score = 1.0; // in [0, 1], 1 = centered
};

/// Per-step penalties summed over the slice; the offset score is a mean.
/// All cost fields are <= 0.
inline RationalityCosts rationality_costs(std::span<const StepSample> slice,
                                          const MetricConfig& cfg) {
  RationalityCosts out;
  if (slice.empty()) return out;
  double offset_sum = 0.0;
  for (const StepSample& s : slice) {
    const double kappa = std::tan(s.steer) / s.wheelbase;
    const double lat_accel = s.speed * s.speed * kappa;
    out.lon_accel_cost -= std::max(0.0, std::abs(s.accel) - cfg.alpha_th);
    out.lat_accel_cost -= std::max(0.0, std::abs(lat_accel) - cfg.a_lat_th);
    out.sharp_turn_cost -= std::max(0.0, std::abs(kappa) - cfg.kappa_th);
    if (s.accel < -cfg.b_em) out.emergency_brake_cost -= cfg.w_b;
    out.speed_change_cost -=
        std::max(0.0, std::abs(s.speed_change) - cfg.speed_change_th * s.dt);
    offset_sum += std::max(0.0, 1.0 - std::abs(s.lateral_offset) / (0.5 * s.lane_width));
  }
  out.lateral_offset_score = offset_sum / static_cast<double>(slice.size());
  return out;
}

/// Raw threshold-exceedance penalties over the target's current
/// leader/follower pairs (both >= 0; callers negate/weight them).
struct PairPenalties {
  double ttc = 0.0;
  double drac = 0.0;
};

inline PairPenalties target_pair_penalties(const WorldState& world,
                                           const MetricConfig& cfg) {
  PairPenalties pen;
  const Agent* t = world.target();
  if (t == nullptr) return pen;
  auto add_pair = [&](const PairKinematics& pk) {
    if (pk.gap <= 0.0) return;
    const double ttc = time_to_collision(pk);
    if (std::isfinite(ttc)) pen.ttc += std::max(0.0, (cfg.ttc_th - ttc) / cfg.ttc_th);
    pen.drac += std::max(0.0, drac(pk) - cfg.drac_th);
  };
  if (const auto leader = find_leader(world, *t)) {
    add_pair({leader->gap, t->state.speed, leader->speed});
  }
  if (const auto follower = find_follower(world, *t)) {
    add_pair({follower->gap, follower->speed, t->state.speed});
  }
  return pen;
}

/// Weighted naturalistic cost of the current world state, <= 0. Zero when no
/// interacting pair exists.
inline double naturalistic_cost(const WorldState& world, const MetricConfig& cfg,
                                double w_ttc = 1.0, double w_drac = 1.0) {
  const PairPenalties pen = target_pair_penalties(world, cfg);
  return -w_ttc * pen.ttc - w_drac * pen.drac;
}

// ---------------------------------------------------------------------------
// Emission model: velocity-acceleration polynomial with config coefficients.
// The shipped defaults are illustrative, not calibrated against any fleet.

struct EmissionCoefficients {
  double c0 = 0.2;
  double c1 = 0.02;
  double c2 = 0.001;
  double c3 = 5e-5;
  double c4 = 0.01;
  double c5 = 0.005;
};

/// Instantaneous CO2 rate in g/s, clamped at zero.
inline double co2_rate(double v, double a, const EmissionCoefficients& c) {
  return std::max(0.0, c.c0 + c.c1 * v + c.c2 * v * v + c.c3 * v * v * v +
                           c.c4 * a * v + c.c5 * a * a * v);
}

// ---------------------------------------------------------------------------

struct TrajectoryQuality {
  double lon_accel_cost = 0.0;
  double lat_accel_cost = 0.0;
  double emergency_brake_cost = 0.0;
  double sharp_turn_cost = 0.0;
  double speed_change_cost = 0.0;
  double lateral_offset_score = 1.0;
  double ttc_cost = 0.0;
  double drac_cost = 0.0;
  double distance = 0.0; // m, all agents
  double co2 = 0.0;      // g, all agents
};

inline const std::array<const char*, 10>& quality_metric_names() {
  static const std::array<const char*, 10> names = {
      "lon_accel_cost",   "lat_accel_cost", "emergency_brake_cost",
      "sharp_turn_cost",  "speed_change_cost", "lateral_offset_score",
      "ttc_cost",         "drac_cost",      "distance",
      "co2"};
  return names;
}

inline double quality_metric_value(const TrajectoryQuality& q, const std::string& name) {
  if (name == "lon_accel_cost") return q.lon_accel_cost;
  if (name == "lat_accel_cost") return q.lat_accel_cost;
  if (name == "emergency_brake_cost") return q.emergency_brake_cost;
  if (name == "sharp_turn_cost") return q.sharp_turn_cost;
  if (name == "speed_change_cost") return q.speed_change_cost;
  if (name == "lateral_offset_score") return q.lateral_offset_score;
  if (name == "ttc_cost") return q.ttc_cost;
  if (name == "drac_cost") return q.drac_cost;
  if (name == "distance") return q.distance;
  if (name == "co2") return q.co2;
  throw std::invalid_argument("unknown metric '" + name + "'");
}

/// Builds the per-step samples of the target agent from a recorded trace.
inline std::vector<StepSample> target_step_samples(const EpisodeTrace& trace) {
  std::vector<StepSample> samples;
  const TraceRow* prev = nullptr;
  for (const auto& rows : trace.steps) {
    const TraceRow* cur = nullptr;
    for (const TraceRow& r : rows) {
      if (r.is_target) cur = &r;
    }
    if (cur == nullptr) continue;
    if (prev != nullptr) {
      samples.push_back({cur->accel, cur->steer, cur->speed, cur->speed - prev->speed,
                         cur->d, cur->lane_width, cur->wheelbase, trace.dt});
    }
    prev = cur;
  }
  return samples;
}

/// Assembles the full quality report for one episode trace. Rationality and
/// safety terms describe the target; distance and emissions aggregate every
/// agent ("scenario complexity").
inline TrajectoryQuality aggregate_quality(const EpisodeTrace& trace,
                                           const std::vector<PairPenalties>& pair_samples,
                                           const MetricConfig& cfg,
                                           const EmissionCoefficients& emis = {}) {
  TrajectoryQuality q;
  const auto samples = target_step_samples(trace);
  const RationalityCosts rc = rationality_costs(samples, cfg);
  q.lon_accel_cost = rc.lon_accel_cost;
  q.lat_accel_cost = rc.lat_accel_cost;
  q.emergency_brake_cost = rc.emergency_brake_cost;
  q.sharp_turn_cost = rc.sharp_turn_cost;
  q.speed_change_cost = rc.speed_change_cost;
  q.lateral_offset_score = rc.lateral_offset_score;

  for (const PairPenalties& p : pair_samples) {
    q.ttc_cost -= p.ttc;
    q.drac_cost -= p.drac;
  }

  std::map<AgentId, std::pair<double, double>> odo; // first, last
  for (const auto& rows : trace.steps) {
    for (const TraceRow& r : rows) {
      auto [it, inserted] = odo.try_emplace(r.agent_id, r.odometer, r.odometer);
      if (!inserted) it->second.second = r.odometer;
    }
  }
  for (const auto& [id, pair] : odo) {
    (void)id;
    q.distance += pair.second - pair.first;
  }

  // The first recorded rows are the pre-episode state; emission accrues over
  // executed steps only.
  for (size_t si = 1; si < trace.steps.size(); ++si) {
    for (const TraceRow& r : trace.steps[si]) {
      q.co2 += co2_rate(r.speed, r.accel, emis) * trace.dt;
    }
  }
  return q;
}

} // namespace crashsearch

#endif // CRASHSEARCH_METRICS_HPP
