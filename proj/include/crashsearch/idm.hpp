#ifndef CRASHSEARCH_IDM_HPP
#define CRASHSEARCH_IDM_HPP

#include <cmath>
#include <stdexcept>

#include "crashsearch/vehicle.hpp"

namespace crashsearch {

/// Intelligent Driver Model acceleration.
///   a * [1 - (v/v0)^delta - (s*/gap)^2],  s* = s0 + v*T + v*dv / (2*sqrt(a*b))
/// `closing_speed` is follower speed minus leader speed. Use an infinite gap
/// for a free road. The result is clamped to [-max_decel_physical, a].
/// A non-positive gap means the pair is already in contact; callers must
/// handle that before asking for an acceleration.
inline double idm_acceleration(const IdmParams& p, double v, double gap,
                               double closing_speed,
                               double max_decel_physical = 9.0) {
  if (gap <= 0.0) throw std::domain_error("idm_acceleration: gap must be > 0");
  const double free_term = std::pow(v / p.desired_speed, p.exponent);
  double interaction = 0.0;
  if (std::isfinite(gap)) {
    const double s_star = p.min_gap + v * p.time_headway +
                          v * closing_speed /
                              (2.0 * std::sqrt(p.max_accel * p.comfort_decel));
    const double ratio = s_star / gap;
    interaction = ratio * ratio;
  }
  const double accel = p.max_accel * (1.0 - free_term - interaction);
  return std::clamp(accel, -max_decel_physical, p.max_accel);
}

} // namespace crashsearch

#endif // CRASHSEARCH_IDM_HPP
