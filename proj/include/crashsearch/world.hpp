#ifndef CRASHSEARCH_WORLD_HPP
#define CRASHSEARCH_WORLD_HPP

#include <map>
#include <memory>
#include <set>
#include <vector>

#include "crashsearch/geometry.hpp"
#include "crashsearch/hashing.hpp"
#include "crashsearch/network.hpp"
#include "crashsearch/rng.hpp"
#include "crashsearch/vehicle.hpp"

namespace crashsearch {

using AgentId = int;

struct Agent {
  AgentId id = 0;
  VehicleSpec spec;
  VehicleState state;
  IdmParams idm;
  std::vector<LaneId> route; // lane ids in travel order
  size_t route_pos = 0;      // index of the current route lane
  bool despawn_flag = false;

  Obb footprint() const {
    return {state.position, 0.5 * spec.length, 0.5 * spec.width, state.heading};
  }
  const LaneId* current_lane() const {
    return route_pos < route.size() ? &route[route_pos] : nullptr;
  }
};

struct CollisionEvent {
  double time = 0.0;
  std::set<AgentId> participants;
  Vec2 location;
  double relative_heading = 0.0; // of the signature pair, wrapped
  std::vector<VehicleClass> participant_classes;
  bool target_involved = false;
  // The canonical pair for signature derivation: the target and its nearest
  // co-participant when the target is involved, else the closest pair.
  VehicleClass sig_class_a = VehicleClass::car;
  VehicleClass sig_class_b = VehicleClass::car;
};

enum class TerminalStatus { running, collision_target, horizon_reached, target_off_network };

inline const char* to_string(TerminalStatus s) {
  switch (s) {
    case TerminalStatus::running: return "running";
    case TerminalStatus::collision_target: return "collision_target";
    case TerminalStatus::horizon_reached: return "horizon_reached";
    case TerminalStatus::target_off_network: return "target_off_network";
  }
  return "?";
}

struct FlowConfig {
  int vehicle_count_min = 6;
  int vehicle_count_max = 10;
  double bicycle_weight = 0.1;
  double car_weight = 0.8;
  double truck_weight = 0.1;
  double depart_rate = 1.5; // vehicles per second during the insertion window
  std::string route_policy = "random_od";
  int warmup_steps_min = 50;
  int warmup_steps_max = 150;

  void validate() const {
    if (vehicle_count_min < 1 || vehicle_count_max < vehicle_count_min) {
      throw ConfigError("flow vehicle_count range invalid");
    }
    const double wsum = bicycle_weight + car_weight + truck_weight;
    if (std::abs(wsum - 1.0) > 1e-9) throw ConfigError("flow class weights must sum to 1");
    if (depart_rate <= 0) throw ConfigError("flow depart_rate must be > 0");
    if (warmup_steps_min < 0 || warmup_steps_max < warmup_steps_min) {
      throw ConfigError("flow warmup_steps range invalid");
    }
    if (route_policy != "random_od") {
      throw ConfigError("unknown route policy '" + route_policy + "'");
    }
  }
};

/// Joint simulation state. Value-copyable: a copy is a snapshot.
struct WorldState {
  double time = 0.0;
  double dt = 0.1;
  std::map<AgentId, Agent> agents;
  AgentId target_id = -1;
  std::shared_ptr<const RoadNetwork> network;
  SplitMix64 rng;
  std::vector<CollisionEvent> collision_log;
  double root_time = 0.0; // horizon reference, set when a search episode starts

  const Agent* target() const {
    auto it = agents.find(target_id);
    return it == agents.end() ? nullptr : &it->second;
  }
  int steps_since_root() const {
    return static_cast<int>(std::llround((time - root_time) / dt));
  }
};

using Snapshot = WorldState; // deep copy by value; the network is shared and immutable

inline Snapshot snapshot(const WorldState& world) { return world; }
inline WorldState restore(const Snapshot& snap) { return snap; }

/// Hash of every dynamic field (bit patterns of doubles). The network is
/// immutable per run and excluded.
inline uint64_t world_hash(const WorldState& w) {
  Fnv1a h;
  h.add_double(w.time);
  h.add_double(w.dt);
  h.add_double(w.root_time);
  h.add_i64(w.target_id);
  h.add_u64(w.rng.state());
  h.add_u64(w.agents.size());
  for (const auto& [id, a] : w.agents) {
    h.add_i64(id);
    h.add_double(a.state.position.x);
    h.add_double(a.state.position.y);
    h.add_double(a.state.heading);
    h.add_double(a.state.speed);
    h.add_double(a.state.accel);
    h.add_double(a.state.steer);
    h.add_double(a.state.odometer);
    h.add_string(a.state.pose.lane_id);
    h.add_double(a.state.pose.s);
    h.add_double(a.state.pose.d);
    h.add_u64(a.route_pos);
    h.add_u64(a.route.size());
    for (const auto& l : a.route) h.add_string(l);
    h.add_u64(static_cast<uint64_t>(a.spec.vehicle_class));
    h.add_double(a.spec.length);
    h.add_double(a.spec.width);
  }
  h.add_u64(w.collision_log.size());
  for (const auto& ev : w.collision_log) {
    h.add_double(ev.time);
    for (AgentId id : ev.participants) h.add_i64(id);
    h.add_double(ev.location.x);
    h.add_double(ev.location.y);
    h.add_double(ev.relative_heading);
    h.add_u64(ev.target_involved ? 1 : 0);
  }
  return h.value();
}

/// Oriented-rectangle collision detection: uniform-grid broad phase (cell
/// size = longest vehicle), separating-axis narrow phase, overlapping pairs
/// merged into maximal connected groups (one event per group).
inline std::vector<CollisionEvent> detect_collisions(const WorldState& world) {
  std::vector<const Agent*> agents;
  agents.reserve(world.agents.size());
  for (const auto& [id, a] : world.agents) agents.push_back(&a);
  const size_t n = agents.size();
  if (n < 2) return {};

  double cell = 1.0;
  for (const auto* a : agents) cell = std::max(cell, a->spec.length);

  std::map<std::pair<long, long>, std::vector<size_t>> grid;
  for (size_t i = 0; i < n; ++i) {
    const Vec2 p = agents[i]->state.position;
    grid[{static_cast<long>(std::floor(p.x / cell)),
          static_cast<long>(std::floor(p.y / cell))}]
        .push_back(i);
  }

  std::vector<size_t> parent(n);
  for (size_t i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  std::vector<std::pair<size_t, size_t>> hits;
  std::set<std::pair<size_t, size_t>> tested;
  for (const auto& [key, members] : grid) {
    for (long dx = -1; dx <= 1; ++dx) {
      for (long dy = -1; dy <= 1; ++dy) {
        auto it = grid.find({key.first + dx, key.second + dy});
        if (it == grid.end()) continue;
        for (size_t i : members) {
          for (size_t j : it->second) {
            if (i >= j) continue;
            if (!tested.insert({i, j}).second) continue;
            if (obb_overlap(agents[i]->footprint(), agents[j]->footprint())) {
              hits.emplace_back(i, j);
              const size_t a = find(i), b = find(j);
              if (a != b) parent[a] = b;
            }
          }
        }
      }
    }
  }
  if (hits.empty()) return {};

  std::map<size_t, std::vector<size_t>> groups;
  for (const auto& [i, j] : hits) {
    groups[find(i)].push_back(i);
    groups[find(i)].push_back(j);
  }

  std::vector<CollisionEvent> events;
  for (auto& [root, members] : groups) {
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    CollisionEvent ev;
    ev.time = world.time;
    for (size_t m : members) {
      ev.participants.insert(agents[m]->id);
      ev.participant_classes.push_back(agents[m]->spec.vehicle_class);
      if (agents[m]->id == world.target_id) ev.target_involved = true;
    }

    // Signature pair: target + nearest co-participant, else the closest pair.
    size_t pa = members[0], pb = members.size() > 1 ? members[1] : members[0];
    if (ev.target_involved) {
      size_t t = members[0];
      for (size_t m : members) {
        if (agents[m]->id == world.target_id) t = m;
      }
      double best = std::numeric_limits<double>::infinity();
      for (size_t m : members) {
        if (m == t) continue;
        const double d =
            (agents[m]->state.position - agents[t]->state.position).norm();
        if (d < best) {
          best = d;
          pb = m;
        }
      }
      pa = t;
    } else {
      double best = std::numeric_limits<double>::infinity();
      for (size_t x = 0; x < members.size(); ++x) {
        for (size_t y = x + 1; y < members.size(); ++y) {
          const double d = (agents[members[x]]->state.position -
                            agents[members[y]]->state.position)
                               .norm();
          if (d < best) {
            best = d;
            pa = members[x];
            pb = members[y];
          }
        }
      }
    }
    // Canonical order for participant-order invariance.
    if (agents[pa]->id != world.target_id && agents[pa]->id > agents[pb]->id) {
      std::swap(pa, pb);
    }
    ev.sig_class_a = agents[pa]->spec.vehicle_class;
    ev.sig_class_b = agents[pb]->spec.vehicle_class;
    ev.relative_heading =
        wrap_angle(agents[pb]->state.heading - agents[pa]->state.heading);
    ev.location = obb_overlap_centroid(agents[pa]->footprint(), agents[pb]->footprint());
    events.push_back(std::move(ev));
  }
  return events;
}

} // namespace crashsearch

#endif // CRASHSEARCH_WORLD_HPP
