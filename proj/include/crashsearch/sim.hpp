#ifndef CRASHSEARCH_SIM_HPP
#define CRASHSEARCH_SIM_HPP

#include <deque>
#include <optional>
#include <sstream>

#include "crashsearch/bicycle.hpp"
#include "crashsearch/default_policy.hpp"
#include "crashsearch/world.hpp"

namespace crashsearch {

struct SpawnError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimSetup {
  double dt = 0.1;
  IdmParams idm;
  PolicyConfig policy;
  VehicleSpec bicycle_spec = default_spec(VehicleClass::bicycle);
  VehicleSpec car_spec = default_spec(VehicleClass::car);
  VehicleSpec truck_spec = default_spec(VehicleClass::truck);

  const VehicleSpec& spec_for(VehicleClass c) const {
    switch (c) {
      case VehicleClass::bicycle: return bicycle_spec;
      case VehicleClass::truck: return truck_spec;
      case VehicleClass::car:
      default: return car_spec;
    }
  }
};

namespace sim_detail {

/// Shortest lane path (hop count) from `from` to `to` over successor links.
inline std::optional<std::vector<size_t>> lane_path(const RoadNetwork& net, size_t from,
                                                    size_t to) {
  std::vector<int> prev(net.lane_count(), -2);
  std::deque<size_t> queue{from};
  prev[from] = -1;
  while (!queue.empty()) {
    const size_t cur = queue.front();
    queue.pop_front();
    if (cur == to) {
      std::vector<size_t> path;
      for (int x = static_cast<int>(to); x != -1; x = prev[x]) {
        path.push_back(static_cast<size_t>(x));
      }
      std::reverse(path.begin(), path.end());
      return path;
    }
    for (size_t next : net.successors_of(cur)) {
      if (prev[next] == -2) {
        prev[next] = static_cast<int>(cur);
        queue.push_back(next);
      }
    }
  }
  return std::nullopt;
}

/// Projects the agent position onto its route, advancing the route cursor
/// past completed lanes. Returns false when the route is exhausted.
inline bool refresh_pose(Agent& agent, const RoadNetwork& net) {
  while (agent.route_pos < agent.route.size()) {
    const Lane* lane = net.find_lane(agent.route[agent.route_pos]);
    const PolylineProjection proj =
        project_onto_polyline(lane->centerline, lane->cum_s, agent.state.position);
    if (proj.s >= lane->length() - 1e-6 && agent.route_pos + 1 < agent.route.size()) {
      ++agent.route_pos;
      continue;
    }
    agent.state.pose = LanePose{lane->id, proj.s, proj.d};
    return proj.s < lane->length() - 1e-6;
  }
  return false;
}

inline bool insertion_safe(const WorldState& world, const Lane& lane,
                           const VehicleSpec& spec, double v_init,
                           const IdmParams& idm) {
  const Vec2 pos = lane.point_at(0.0);
  for (const auto& [oid, other] : world.agents) {
    (void)oid;
    const double euclid = (other.state.position - pos).norm();
    if (euclid < 0.5 * (spec.length + other.spec.length) + 1.0) return false;
    const LaneId* ol = other.current_lane();
    if (ol != nullptr && *ol == lane.id) {
      const double along = other.state.pose.s;
      const double gap = along - 0.5 * (spec.length + other.spec.length);
      if (gap < idm.min_gap + v_init * idm.time_headway) return false;
    }
  }
  return true;
}

} // namespace sim_detail

/// Advances the world by one step. All controls are computed from the
/// pre-step state (synchronous update); the target takes `target_control`
/// when provided and the default policy otherwise. New collisions are
/// appended to the log; colliding background agents despawn immediately, as
/// do agents that leave the network.
inline void step(WorldState& world, std::optional<ControlInput> target_control,
                 const SimSetup& setup) {
  std::map<AgentId, ControlInput> controls;
  for (const auto& [id, agent] : world.agents) {
    (void)agent;
    if (id == world.target_id && target_control) {
      controls[id] = *target_control;
    } else {
      controls[id] = default_policy(world, id, setup.policy);
    }
  }

  std::vector<AgentId> exited;
  for (auto& [id, agent] : world.agents) {
    agent.state = bicycle_step(agent.state, agent.spec, controls[id], world.dt);
    const bool on_route = sim_detail::refresh_pose(agent, *world.network);
    if (!on_route || agent.despawn_flag) {
      if (id == world.target_id) {
        // Route end or drift: the target terminates via is_terminal when it
        // leaves the network entirely, never by despawn.
        agent.despawn_flag = false;
      } else {
        exited.push_back(id);
      }
    }
  }
  world.time += world.dt;

  const auto events = detect_collisions(world);
  for (const auto& ev : events) {
    world.collision_log.push_back(ev);
    for (AgentId pid : ev.participants) {
      if (pid != world.target_id) exited.push_back(pid);
    }
  }
  for (AgentId id : exited) world.agents.erase(id);
}

/// Target off the drivable network entirely (no lane within capture radius).
inline bool target_off_network(const WorldState& world) {
  const Agent* t = world.target();
  if (t == nullptr) return true;
  if (std::abs(t->state.pose.d) < 0.5 * t->spec.width + 5.0 &&
      t->route_pos < t->route.size()) {
    return false; // near its own route lane; skip the global scan
  }
  return !locate_on_lane(*world.network, t->state.position, t->state.heading).has_value();
}

/// Terminal classification with the precedence collision > off-network >
/// horizon. `horizon_steps` counts simulator steps since root_time.
inline TerminalStatus is_terminal(const WorldState& world, int horizon_steps) {
  for (const auto& ev : world.collision_log) {
    if (ev.target_involved) return TerminalStatus::collision_target;
  }
  if (target_off_network(world)) return TerminalStatus::target_off_network;
  if (world.steps_since_root() >= horizon_steps) return TerminalStatus::horizon_reached;
  return TerminalStatus::running;
}

/// Seeded traffic generation: draws vehicle count, classes, routes and
/// insertion times, inserts vehicles at safe gaps during a seeded-random
/// warm-up run under the default policy, then designates the target (uniform
/// choice among cars). Deterministic in (network, flow, seed).
inline WorldState spawn_traffic(std::shared_ptr<const RoadNetwork> network,
                                const FlowConfig& flow, uint64_t seed,
                                const SimSetup& setup = {}) {
  flow.validate();
  const RoadNetwork& net = *network;
  if (net.lane_count() == 0) throw SpawnError("network has no lanes");
  if (net.entry_lanes().empty() || net.exit_lanes().empty()) {
    throw SpawnError("network has no entry or exit lanes for routing");
  }

  WorldState world;
  world.network = std::move(network);
  world.dt = setup.dt;
  world.rng = SplitMix64(seed);

  const int count = static_cast<int>(
      world.rng.uniform_range(flow.vehicle_count_min, flow.vehicle_count_max));
  const int warmup_steps = static_cast<int>(
      world.rng.uniform_range(flow.warmup_steps_min, flow.warmup_steps_max));
  const double insertion_window = 0.8 * warmup_steps * setup.dt;

  struct Pending {
    AgentId id;
    VehicleClass cls;
    std::vector<size_t> path;
    double due;
    double speed_factor;
  };
  std::vector<Pending> pending;
  double depart_clock = 0.0;
  for (int i = 0; i < count; ++i) {
    Pending p;
    p.id = i + 1;
    const double u = world.rng.next_double();
    if (u < flow.bicycle_weight) {
      p.cls = VehicleClass::bicycle;
    } else if (u < flow.bicycle_weight + flow.car_weight) {
      p.cls = VehicleClass::car;
    } else {
      p.cls = VehicleClass::truck;
    }
    bool routed = false;
    for (int attempt = 0; attempt < 20 && !routed; ++attempt) {
      const size_t o = net.entry_lanes()[world.rng.uniform_int(net.entry_lanes().size())];
      const size_t d = net.exit_lanes()[world.rng.uniform_int(net.exit_lanes().size())];
      if (auto path = sim_detail::lane_path(net, o, d)) {
        p.path = std::move(*path);
        routed = true;
      }
    }
    if (!routed) throw SpawnError("no route between sampled entry and exit lanes");
    depart_clock += -std::log(1.0 - world.rng.next_double()) / flow.depart_rate;
    p.due = std::min(depart_clock, insertion_window);
    p.speed_factor = world.rng.uniform(0.4, 0.7);
    pending.push_back(std::move(p));
  }

  for (int s = 0; s < warmup_steps; ++s) {
    for (auto it = pending.begin(); it != pending.end();) {
      if (it->due > world.time) {
        ++it;
        continue;
      }
      const Lane& origin = net.lane(it->path.front());
      const VehicleSpec& spec = setup.spec_for(it->cls);
      const double v_init =
          it->speed_factor *
          std::min(origin.speed_limit, class_speed_cap(it->cls));
      if (!sim_detail::insertion_safe(world, origin, spec, v_init, setup.idm)) {
        ++it; // retry next step
        continue;
      }
      Agent agent;
      agent.id = it->id;
      agent.spec = spec;
      agent.idm = setup.idm;
      for (size_t lane_idx : it->path) agent.route.push_back(net.lane(lane_idx).id);
      agent.state.position = origin.point_at(0.0);
      agent.state.heading = origin.heading_at(0.0);
      agent.state.speed = v_init;
      sim_detail::refresh_pose(agent, net);
      world.agents.emplace(agent.id, std::move(agent));
      it = pending.erase(it);
    }
    step(world, std::nullopt, setup);
  }

  if (!pending.empty()) {
    std::ostringstream msg;
    msg << "network too small for requested flow: placed "
        << (count - static_cast<int>(pending.size())) << " of " << count
        << " vehicles at safe gaps";
    throw SpawnError(msg.str());
  }
  if (world.agents.empty()) throw SpawnError("no vehicles survived warm-up");

  std::vector<AgentId> cars;
  for (const auto& [id, agent] : world.agents) {
    if (agent.spec.vehicle_class == VehicleClass::car) cars.push_back(id);
  }
  if (cars.empty()) throw SpawnError("no car available for target designation");
  world.target_id = cars[world.rng.uniform_int(cars.size())];

  // Episodes measure from here; warm-up incidents are not part of any episode.
  world.collision_log.clear();
  world.root_time = world.time;
  return world;
}

// ---------------------------------------------------------------------------
// Trajectory recording (the substrate for metric aggregation and CSV dumps)

struct TraceRow {
  double time = 0.0;
  AgentId agent_id = 0;
  Vec2 position;
  double heading = 0.0;
  double speed = 0.0;
  double accel = 0.0;
  double steer = 0.0;
  LaneId lane_id;
  double s = 0.0;
  double d = 0.0;
  double odometer = 0.0;
  double lane_width = 3.5;
  double wheelbase = 2.7;
  VehicleClass vehicle_class = VehicleClass::car;
  bool is_target = false;
};

struct EpisodeTrace {
  std::vector<std::vector<TraceRow>> steps; // one row vector per recorded step
  std::vector<CollisionEvent> events;
  double dt = 0.1;

  void record(const WorldState& world) {
    std::vector<TraceRow> rows;
    rows.reserve(world.agents.size());
    for (const auto& [id, a] : world.agents) {
      const Lane* lane = world.network->find_lane(a.state.pose.lane_id);
      rows.push_back({world.time, id, a.state.position, a.state.heading, a.state.speed,
                      a.state.accel, a.state.steer, a.state.pose.lane_id,
                      a.state.pose.s, a.state.pose.d, a.state.odometer,
                      lane != nullptr ? lane->width : 3.5, a.spec.wheelbase,
                      a.spec.vehicle_class, id == world.target_id});
    }
    steps.push_back(std::move(rows));
  }
};

/// One CSV row per (step, agent):
/// time,agent_id,x,y,heading,speed,accel,steer,lane_id,s,d
inline std::string trace_to_csv(const EpisodeTrace& trace) {
  std::ostringstream out;
  out.precision(17);
  out << "time,agent_id,x,y,heading,speed,accel,steer,lane_id,s,d\n";
  for (const auto& rows : trace.steps) {
    for (const TraceRow& r : rows) {
      out << r.time << ',' << r.agent_id << ',' << r.position.x << ',' << r.position.y
          << ',' << r.heading << ',' << r.speed << ',' << r.accel << ',' << r.steer
          << ',' << r.lane_id << ',' << r.s << ',' << r.d << '\n';
    }
  }
  return out.str();
}

} // namespace crashsearch

#endif // CRASHSEARCH_SIM_HPP
