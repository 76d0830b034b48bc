#ifndef CRASHSEARCH_BICYCLE_HPP
#define CRASHSEARCH_BICYCLE_HPP

#include <algorithm>
#include <cmath>

#include "crashsearch/vehicle.hpp"

namespace crashsearch {

/// Kinematic bicycle update. Controls are clamped to the spec bounds; the
/// speed floors at zero (no reverse motion). Heading advances by
/// (v_mean / wheelbase) * tan(steer) * dt and the position follows the exact
/// circular arc of that motion, so composing two half-steps reproduces one
/// full step to machine precision.
inline VehicleState bicycle_step(const VehicleState& state, const VehicleSpec& spec,
                                 const ControlInput& control, double dt) {
  VehicleState out = state;
  const double steer = std::clamp(control.steer, -spec.max_steer, spec.max_steer);
  const double accel = std::clamp(control.accel, -spec.max_decel, spec.max_accel);

  const double v0 = state.speed;
  const double v1 = std::max(0.0, v0 + accel * dt);
  const double v_mean = 0.5 * (v0 + v1);
  const double distance = v_mean * dt;
  const double dpsi = (v_mean / spec.wheelbase) * std::tan(steer) * dt;

  // Chord of the circular arc: length = distance * sinc(dpsi/2), direction
  // h0 + dpsi/2. Stable for arbitrarily small turn rates.
  const double half = 0.5 * dpsi;
  const double sinc = std::abs(half) < 1e-8 ? 1.0 - half * half / 6.0
                                            : std::sin(half) / half;
  const double chord = distance * sinc;
  out.position.x = state.position.x + chord * std::cos(state.heading + half);
  out.position.y = state.position.y + chord * std::sin(state.heading + half);
  out.heading = wrap_angle(state.heading + dpsi);
  out.speed = v1;
  out.accel = accel;
  out.steer = steer;
  out.odometer = state.odometer + distance;
  return out;
}

/// Overload that refreshes the network-relative pose afterwards.
inline VehicleState bicycle_step(const VehicleState& state, const VehicleSpec& spec,
                                 const ControlInput& control, double dt,
                                 const RoadNetwork& net) {
  VehicleState out = bicycle_step(state, spec, control, dt);
  if (auto pose = locate_on_lane(net, out.position, out.heading)) {
    out.pose = *pose;
  }
  return out;
}

} // namespace crashsearch

#endif // CRASHSEARCH_BICYCLE_HPP
