#ifndef CRASHSEARCH_VEHICLE_HPP
#define CRASHSEARCH_VEHICLE_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "crashsearch/geometry.hpp"
#include "crashsearch/network.hpp"

namespace crashsearch {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class VehicleClass { bicycle, car, truck };

inline const char* to_string(VehicleClass c) {
  switch (c) {
    case VehicleClass::bicycle: return "bicycle";
    case VehicleClass::car: return "car";
    case VehicleClass::truck: return "truck";
  }
  return "?";
}

inline VehicleClass vehicle_class_from_string(const std::string& s) {
  if (s == "bicycle") return VehicleClass::bicycle;
  if (s == "car") return VehicleClass::car;
  if (s == "truck") return VehicleClass::truck;
  throw ConfigError("unknown vehicle class '" + s + "'");
}

struct VehicleSpec {
  double length = 4.5;
  double width = 1.8;
  double wheelbase = 2.7;
  double max_accel = 3.0;
  double max_decel = 9.0; // magnitude
  double max_steer = 0.6;
  VehicleClass vehicle_class = VehicleClass::car;

  void validate() const {
    if (length <= 0 || width <= 0 || wheelbase <= 0 || max_accel <= 0 ||
        max_decel <= 0 || max_steer <= 0 || max_steer >= kPi / 2) {
      throw ConfigError("vehicle spec bounds must be strictly positive (max_steer < pi/2)");
    }
    if (wheelbase > length) throw ConfigError("wheelbase must be <= length");
  }
};

inline VehicleSpec default_spec(VehicleClass c) {
  switch (c) {
    case VehicleClass::bicycle:
      return {1.8, 0.6, 1.1, 1.5, 4.0, 1.0, VehicleClass::bicycle};
    case VehicleClass::truck:
      return {8.0, 2.4, 5.0, 1.5, 7.0, 0.45, VehicleClass::truck};
    case VehicleClass::car:
    default:
      return {4.5, 1.8, 2.7, 3.0, 9.0, 0.6, VehicleClass::car};
  }
}

/// Free-flow speed cap by class, applied on top of lane speed limits.
inline double class_speed_cap(VehicleClass c) {
  switch (c) {
    case VehicleClass::bicycle: return 7.0;
    case VehicleClass::truck: return 22.0;
    case VehicleClass::car:
    default: return std::numeric_limits<double>::infinity();
  }
}

struct VehicleState {
  Vec2 position;
  double heading = 0.0; // [-pi, pi)
  double speed = 0.0;   // >= 0, no reverse motion
  double accel = 0.0;   // last applied
  double steer = 0.0;   // last applied
  LanePose pose;        // network-relative
  double odometer = 0.0;
};

struct ControlInput {
  double steer = 0.0; // rad
  double accel = 0.0; // m/s^2
  bool operator==(const ControlInput& o) const {
    return steer == o.steer && accel == o.accel;
  }
};

struct IdmParams {
  double desired_speed = 13.9; // v0
  double time_headway = 1.5;   // T
  double min_gap = 2.0;        // s0
  double max_accel = 1.5;      // a
  double comfort_decel = 2.0;  // b
  double exponent = 4.0;       // delta

  void validate() const {
    if (desired_speed <= 0 || time_headway <= 0 || min_gap <= 0 || max_accel <= 0 ||
        comfort_decel <= 0) {
      throw ConfigError("IDM parameters must be strictly positive");
    }
    if (exponent < 1.0) throw ConfigError("IDM exponent must be >= 1");
  }
};

/// Discretized target action space: the cartesian grid of steering angles and
/// acceleration rates. Index layout is steer-major.
struct ActionGrid {
  std::vector<double> steer_values;
  std::vector<double> accel_values;

  size_t size() const { return steer_values.size() * accel_values.size(); }
  ControlInput at(size_t flat) const {
    return {steer_values[flat / accel_values.size()],
            accel_values[flat % accel_values.size()]};
  }
  size_t steer_index(size_t flat) const { return flat / accel_values.size(); }
  size_t accel_index(size_t flat) const { return flat % accel_values.size(); }

  void validate() const {
    if (steer_values.empty() || accel_values.empty()) {
      throw ConfigError("action grid lists must be non-empty");
    }
    for (size_t i = 1; i < steer_values.size(); ++i) {
      if (steer_values[i] <= steer_values[i - 1]) {
        throw ConfigError("action grid steer values must be strictly increasing");
      }
    }
    for (size_t i = 1; i < accel_values.size(); ++i) {
      if (accel_values[i] <= accel_values[i - 1]) {
        throw ConfigError("action grid accel values must be strictly increasing");
      }
    }
    // symmetry about zero for steering
    const size_t n = steer_values.size();
    for (size_t i = 0; i < n; ++i) {
      if (std::abs(steer_values[i] + steer_values[n - 1 - i]) > 1e-9) {
        throw ConfigError("action grid steer values must be symmetric about 0");
      }
    }
  }
};

struct ActionGridConfig {
  std::vector<double> steer_values = {-0.3, -0.15, 0.0, 0.15, 0.3};
  std::vector<double> accel_values = {-8.0, -4.5, -2.0, 0.0, 2.0};
};

inline ActionGrid build_action_grid(const ActionGridConfig& config = {}) {
  ActionGrid grid{config.steer_values, config.accel_values};
  grid.validate();
  return grid;
}

} // namespace crashsearch

#endif // CRASHSEARCH_VEHICLE_HPP
