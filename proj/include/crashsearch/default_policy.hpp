#ifndef CRASHSEARCH_DEFAULT_POLICY_HPP
#define CRASHSEARCH_DEFAULT_POLICY_HPP

#include <optional>

#include "crashsearch/idm.hpp"
#include "crashsearch/world.hpp"

namespace crashsearch {

struct PolicyConfig {
  double lookahead = 60.0;          // leader search distance along the route (m)
  double gap_acceptance_time = 4.0; // junction yield horizon (s)
  double lane_keep_gain_d = 0.25;   // rad per meter of lateral offset
  double lane_keep_gain_h = 1.2;    // rad per rad of heading error
  double yield_margin = 1.0;        // stop this far before a conflict entry (m)
  double pass_margin = 1.5;         // ETA lead required to take priority (s)
};

struct LeaderInfo {
  AgentId id = -1;
  double gap = 0.0; // bumper to bumper
  double speed = 0.0;
};

/// Nearest agent ahead of `self` along its route, within `lookahead` meters.
inline std::optional<LeaderInfo> find_leader(const WorldState& world, const Agent& self,
                                             double lookahead = 60.0) {
  const RoadNetwork& net = *world.network;
  std::optional<LeaderInfo> best;
  double best_dist = lookahead;
  double chain_offset = -self.state.pose.s; // distance from self to lane starts
  for (size_t ri = self.route_pos; ri < self.route.size(); ++ri) {
    const Lane* lane = net.find_lane(self.route[ri]);
    if (lane == nullptr) break;
    for (const auto& [oid, other] : world.agents) {
      if (oid == self.id) continue;
      const LaneId* olane = other.current_lane();
      if (olane == nullptr || *olane != lane->id) continue;
      const double along = chain_offset + other.state.pose.s;
      if (along <= 1e-9) continue; // not ahead
      const double gap = along - 0.5 * (self.spec.length + other.spec.length);
      if (along < best_dist) {
        best_dist = along;
        best = LeaderInfo{oid, gap, other.state.speed};
      }
    }
    chain_offset += lane->length();
    if (chain_offset > lookahead) break;
  }
  return best;
}

/// Nearest agent behind `self` on its current lane or the lanes feeding it.
inline std::optional<LeaderInfo> find_follower(const WorldState& world, const Agent& self,
                                               double lookback = 60.0) {
  const RoadNetwork& net = *world.network;
  const LaneId* lane_id = self.current_lane();
  if (lane_id == nullptr) return std::nullopt;
  const auto lane_idx = net.lane_index(*lane_id);
  if (!lane_idx) return std::nullopt;

  std::optional<LeaderInfo> best;
  double best_dist = lookback;
  auto consider = [&](const Agent& other, double behind) {
    if (behind <= 1e-9) return;
    if (behind < best_dist) {
      best_dist = behind;
      best = LeaderInfo{other.id, behind - 0.5 * (self.spec.length + other.spec.length),
                        other.state.speed};
    }
  };
  for (const auto& [oid, other] : world.agents) {
    if (oid == self.id) continue;
    const LaneId* olane = other.current_lane();
    if (olane == nullptr) continue;
    if (*olane == *lane_id) {
      consider(other, self.state.pose.s - other.state.pose.s);
    } else {
      for (size_t pred : net.predecessors_of(*lane_idx)) {
        if (net.lane(pred).id == *olane) {
          consider(other,
                   self.state.pose.s + (net.lane(pred).length() - other.state.pose.s));
        }
      }
    }
  }
  return best;
}

namespace policy_detail {

/// Distance from `self` to the conflict entry at arclength `s_conf` on route
/// lane index `ri` (relative to route_pos). Negative once passed.
inline double distance_along_route(const Agent& self, const RoadNetwork& net,
                                   size_t ri, double s_conf) {
  double dist = s_conf - self.state.pose.s;
  for (size_t k = self.route_pos; k < ri; ++k) {
    const Lane* lane = net.find_lane(self.route[k]);
    dist += lane->length();
  }
  return dist;
}

/// Required-yield scan over upcoming conflict zones. Returns the distance to
/// the nearest conflict entry this agent must stop for, if any.
inline std::optional<double> yield_distance(const WorldState& world, const Agent& self,
                                            const PolicyConfig& cfg) {
  const RoadNetwork& net = *world.network;
  const double own_speed_floor = std::max(self.state.speed, 0.5);
  std::optional<double> must_stop;

  double chain_offset = -self.state.pose.s;
  for (size_t ri = self.route_pos; ri < self.route.size(); ++ri) {
    const auto lane_idx = net.lane_index(self.route[ri]);
    if (!lane_idx) break;
    const Lane& lane = net.lane(*lane_idx);
    for (const LaneConflict& c : net.conflicts_of(*lane_idx)) {
      const double to_entry = chain_offset + c.s_self;
      const double to_exit = chain_offset + c.s_self_exit;
      if (to_exit < 0.0) continue;       // fully passed
      if (to_entry < -0.5) continue;     // inside the zone: clear it, never stop
      const double own_eta = to_entry / own_speed_floor;
      if (own_eta > cfg.gap_acceptance_time) continue;

      const Lane& other_lane = net.lane(c.other);
      for (const auto& [oid, other] : world.agents) {
        if (oid == self.id) continue;
        const LaneId* ol = other.current_lane();
        if (ol == nullptr || *ol != other_lane.id) continue;
        const double their_to_entry = c.s_other - other.state.pose.s;
        const double their_to_exit =
            c.s_other_exit + 0.5 * other.spec.length - other.state.pose.s;
        if (their_to_exit < 0.0) continue; // already cleared
        bool they_block;
        if (their_to_entry <= 0.5 * other.spec.length) {
          they_block = true; // occupying the zone
        } else {
          const double their_eta = their_to_entry / std::max(other.state.speed, 0.5);
          if (their_eta > cfg.gap_acceptance_time) {
            they_block = false;
          } else if (own_eta + cfg.pass_margin < their_eta) {
            they_block = false; // we clear first
          } else if (std::abs(own_eta - their_eta) <= 1e-9) {
            they_block = self.id > oid; // deterministic tie-break
          } else {
            they_block = true;
          }
        }
        if (they_block) {
          if (!must_stop || to_entry < *must_stop) must_stop = to_entry;
        }
      }
    }
    chain_offset += lane.length();
    if (chain_offset > cfg.lookahead) break;
  }
  return must_stop;
}

} // namespace policy_detail

/// Car-following and lane-keeping policy for background agents: IDM against
/// the nearest route leader, a virtual standing obstacle at junction conflict
/// entries that gap acceptance rejects, and curvature-feedforward proportional
/// steering toward the lane centerline.
inline ControlInput default_policy(const WorldState& world, AgentId agent_id,
                                   const PolicyConfig& cfg = {}) {
  const auto it = world.agents.find(agent_id);
  if (it == world.agents.end()) return {0.0, 0.0};
  const Agent& self = it->second;
  const RoadNetwork& net = *world.network;

  const LaneId* lane_id = self.current_lane();
  const Lane* lane = lane_id != nullptr ? net.find_lane(*lane_id) : nullptr;
  if (lane == nullptr) {
    // Off-network: full braking, flagged for despawn by the stepper.
    return {0.0, -self.spec.max_decel};
  }

  IdmParams idm = self.idm;
  idm.desired_speed = std::min({idm.desired_speed, lane->speed_limit,
                                class_speed_cap(self.spec.vehicle_class)});

  double accel = idm_acceleration(idm, self.state.speed,
                                  std::numeric_limits<double>::infinity(), 0.0,
                                  self.spec.max_decel);
  if (const auto leader = find_leader(world, self, cfg.lookahead)) {
    const double gap = std::max(leader->gap, 0.01);
    accel = std::min(accel,
                     idm_acceleration(idm, self.state.speed, gap,
                                      self.state.speed - leader->speed,
                                      self.spec.max_decel));
  }
  if (const auto stop_dist = policy_detail::yield_distance(world, self, cfg)) {
    const double gap =
        std::max(*stop_dist - 0.5 * self.spec.length - cfg.yield_margin, 0.01);
    accel = std::min(accel, idm_acceleration(idm, self.state.speed, gap,
                                             self.state.speed, self.spec.max_decel));
  }

  // Steering: feedforward from lane curvature plus proportional correction of
  // lateral offset and heading error. Offset left of center (d > 0) steers
  // right (negative).
  const double s = self.state.pose.s;
  const double kappa = lane->curvature_at(s);
  const double lane_heading = lane->heading_at(s);
  const double heading_err = angle_diff(self.state.heading, lane_heading);
  double steer = std::atan(kappa * self.spec.wheelbase) -
                 cfg.lane_keep_gain_d * self.state.pose.d -
                 cfg.lane_keep_gain_h * heading_err;
  steer = std::clamp(steer, -self.spec.max_steer, self.spec.max_steer);
  accel = std::clamp(accel, -self.spec.max_decel, self.spec.max_accel);
  return {steer, accel};
}

} // namespace crashsearch

#endif // CRASHSEARCH_DEFAULT_POLICY_HPP
