#ifndef CRASHSEARCH_NETWORK_HPP
#define CRASHSEARCH_NETWORK_HPP

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "crashsearch/geometry.hpp"

namespace crashsearch {

using NodeId = std::string;
using EdgeId = std::string;
using LaneId = std::string;

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NetworkNode {
  NodeId id;
  Vec2 position;
};

struct Lane {
  LaneId id;
  std::vector<Vec2> centerline;
  double width = 3.5;
  double speed_limit = 13.9;
  std::vector<LaneId> successors;

  // Filled by RoadNetwork::finalize().
  std::vector<double> cum_s;

  double length() const { return cum_s.empty() ? polyline_length(centerline) : cum_s.back(); }
  Vec2 point_at(double s) const { return point_at_arclength(centerline, cum_s, s); }
  double heading_at(double s) const {
    return tangent_at_arclength(centerline, cum_s, s).heading();
  }
  double curvature_at(double s) const {
    return curvature_at_arclength(centerline, cum_s, s);
  }
};

struct RoadEdge {
  EdgeId id;
  NodeId from;
  NodeId to;
  std::vector<Lane> lanes; // lateral order is meaningful; never reordered
};

struct GeoOrigin {
  double lat = 0.0;
  double lon = 0.0;
};

/// Two lanes whose centerlines pass within the combined half-widths somewhere
/// other than a trivial follow relation. `s_*` is the conflict-zone entry
/// arclength on each lane; `merge` marks shared-endpoint conflicts.
struct LaneConflict {
  size_t other;   // flat lane index
  double s_self;  // zone entry on this lane
  double s_other; // zone entry on the other lane
  double s_self_exit = 0.0;
  double s_other_exit = 0.0;
  bool merge = false;
};

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  int connected_components = 0;
  bool ok() const { return errors.empty(); }
};

class RoadNetwork {
 public:
  std::vector<NetworkNode> nodes;
  std::vector<RoadEdge> edges;
  std::optional<GeoOrigin> origin;

  /// Builds lookup tables, arclengths, predecessor links and lane conflicts.
  /// Throws ValidationError when a hard invariant fails.
  void finalize();

  const ValidationReport& report() const { return report_; }
  bool finalized() const { return finalized_; }

  size_t lane_count() const { return lane_refs_.size(); }
  const Lane& lane(size_t flat_index) const {
    const auto& r = lane_refs_[flat_index];
    return edges[r.first].lanes[r.second];
  }
  const Lane* find_lane(const LaneId& id) const {
    auto it = lane_by_id_.find(id);
    return it == lane_by_id_.end() ? nullptr : &lane(it->second);
  }
  std::optional<size_t> lane_index(const LaneId& id) const {
    auto it = lane_by_id_.find(id);
    if (it == lane_by_id_.end()) return std::nullopt;
    return it->second;
  }
  const NetworkNode* find_node(const NodeId& id) const {
    auto it = node_by_id_.find(id);
    return it == node_by_id_.end() ? nullptr : &nodes[it->second];
  }

  const std::vector<size_t>& predecessors_of(size_t lane_idx) const {
    return predecessors_[lane_idx];
  }
  const std::vector<size_t>& successors_of(size_t lane_idx) const {
    return successor_idx_[lane_idx];
  }
  const std::vector<LaneConflict>& conflicts_of(size_t lane_idx) const {
    return conflicts_[lane_idx];
  }

  /// Lanes with no predecessor (traffic sources) and no successor (sinks).
  const std::vector<size_t>& entry_lanes() const { return entry_lanes_; }
  const std::vector<size_t>& exit_lanes() const { return exit_lanes_; }

 private:
  void build_indices();
  void check_invariants();
  void compute_connectivity();
  void compute_conflicts();

  std::map<NodeId, size_t> node_by_id_;
  std::map<LaneId, size_t> lane_by_id_;
  std::vector<std::pair<size_t, size_t>> lane_refs_; // flat index -> (edge, lane)
  std::vector<std::vector<size_t>> predecessors_;
  std::vector<std::vector<size_t>> successor_idx_;
  std::vector<std::vector<LaneConflict>> conflicts_;
  std::vector<size_t> entry_lanes_;
  std::vector<size_t> exit_lanes_;
  ValidationReport report_;
  bool finalized_ = false;
};

struct LanePose {
  LaneId lane_id;
  double s = 0.0;
  double d = 0.0;
};

/// World point for a network-relative pose. d > 0 is left of travel direction.
inline Vec2 point_at(const RoadNetwork& net, const LaneId& lane_id, double s, double d) {
  const Lane* lane = net.find_lane(lane_id);
  if (lane == nullptr) throw ValidationError("point_at: unknown lane '" + lane_id + "'");
  const Vec2 base = lane->point_at(s);
  const Vec2 tan = tangent_at_arclength(lane->centerline, lane->cum_s, s);
  return base + tan.left() * d;
}

/// Finds the lane minimizing |lateral offset| among lanes whose local heading
/// differs from `heading` by less than 90 degrees, within `capture_radius`.
/// Empty result means the pose is off-network.
inline std::optional<LanePose> locate_on_lane(const RoadNetwork& net, const Vec2& point,
                                              double heading,
                                              double capture_radius = 10.0) {
  std::optional<LanePose> best;
  double best_abs_d = std::numeric_limits<double>::infinity();
  double best_heading_diff = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < net.lane_count(); ++i) {
    const Lane& lane = net.lane(i);
    const PolylineProjection proj =
        project_onto_polyline(lane.centerline, lane.cum_s, point);
    if (proj.distance > capture_radius) continue;
    const double lane_heading = lane.heading_at(proj.s);
    const double hd = std::abs(angle_diff(heading, lane_heading));
    if (hd >= kPi / 2.0) continue;
    const double abs_d = std::abs(proj.d);
    if (abs_d < best_abs_d - 1e-12 ||
        (std::abs(abs_d - best_abs_d) <= 1e-12 && hd < best_heading_diff)) {
      best_abs_d = abs_d;
      best_heading_diff = hd;
      best = LanePose{lane.id, proj.s, proj.d};
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

inline void RoadNetwork::build_indices() {
  node_by_id_.clear();
  lane_by_id_.clear();
  lane_refs_.clear();
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (!node_by_id_.emplace(nodes[i].id, i).second) {
      throw ValidationError("duplicate node id '" + nodes[i].id + "'");
    }
  }
  for (size_t e = 0; e < edges.size(); ++e) {
    for (size_t l = 0; l < edges[e].lanes.size(); ++l) {
      Lane& lane = edges[e].lanes[l];
      if (!lane_by_id_.emplace(lane.id, lane_refs_.size()).second) {
        throw ValidationError("duplicate lane id '" + lane.id + "'");
      }
      lane_refs_.emplace_back(e, l);
      lane.cum_s = cumulative_arclength(lane.centerline);
    }
  }
}

inline void RoadNetwork::check_invariants() {
  for (const NetworkNode& n : nodes) {
    if (!std::isfinite(n.position.x) || !std::isfinite(n.position.y)) {
      throw ValidationError("node '" + n.id + "': position not finite");
    }
  }
  for (const RoadEdge& e : edges) {
    if (e.lanes.empty()) throw ValidationError("edge '" + e.id + "': no lanes");
    if (node_by_id_.find(e.from) == node_by_id_.end()) {
      throw ValidationError("edge '" + e.id + "': unknown from node '" + e.from + "'");
    }
    if (node_by_id_.find(e.to) == node_by_id_.end()) {
      throw ValidationError("edge '" + e.id + "': unknown to node '" + e.to + "'");
    }
    for (const Lane& lane : e.lanes) {
      if (lane.width <= 0.0) {
        throw ValidationError("lane '" + lane.id + "': width must be > 0");
      }
      if (lane.speed_limit <= 0.0) {
        throw ValidationError("lane '" + lane.id + "': speed_limit must be > 0");
      }
      if (lane.centerline.size() < 2) {
        throw ValidationError("lane '" + lane.id + "': centerline needs >= 2 points");
      }
      for (size_t i = 1; i < lane.centerline.size(); ++i) {
        if ((lane.centerline[i] - lane.centerline[i - 1]).norm() <= 0.0) {
          throw ValidationError("lane '" + lane.id + "': coincident centerline points");
        }
      }
      for (const LaneId& succ : lane.successors) {
        if (lane_by_id_.find(succ) == lane_by_id_.end()) {
          throw ValidationError("lane '" + lane.id + "': unresolved successor '" + succ +
                                "'");
        }
      }
    }
  }
}

inline void RoadNetwork::compute_connectivity() {
  // Weak connectivity over the node graph. Lanes hang off edges, so edge
  // connectivity is what matters for routing.
  const size_t n = nodes.size();
  std::vector<size_t> parent(n);
  for (size_t i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const RoadEdge& e : edges) {
    const size_t a = find(node_by_id_[e.from]);
    const size_t b = find(node_by_id_[e.to]);
    if (a != b) parent[a] = b;
  }
  std::set<size_t> roots;
  for (size_t i = 0; i < n; ++i) roots.insert(find(i));
  report_.connected_components = static_cast<int>(roots.size());
  if (roots.size() > 1) {
    report_.warnings.push_back("network has " + std::to_string(roots.size()) +
                               " weakly connected components");
  }
}

inline void RoadNetwork::compute_conflicts() {
  const size_t n = lane_refs_.size();
  predecessors_.assign(n, {});
  successor_idx_.assign(n, {});
  conflicts_.assign(n, {});
  entry_lanes_.clear();
  exit_lanes_.clear();

  for (size_t i = 0; i < n; ++i) {
    for (const LaneId& succ : lane(i).successors) {
      const size_t j = lane_by_id_[succ];
      successor_idx_[i].push_back(j);
      predecessors_[j].push_back(i);
    }
  }
  for (size_t i = 0; i < n; ++i) {
    if (predecessors_[i].empty()) entry_lanes_.push_back(i);
    if (successor_idx_[i].empty()) exit_lanes_.push_back(i);
  }

  auto linked = [&](size_t a, size_t b) {
    for (size_t s : successor_idx_[a]) {
      if (s == b) return true;
    }
    for (size_t s : successor_idx_[b]) {
      if (s == a) return true;
    }
    return false;
  };

  for (size_t a = 0; a < n; ++a) {
    const Lane& la = lane(a);
    for (size_t b = a + 1; b < n; ++b) {
      const Lane& lb = lane(b);
      if (linked(a, b)) continue;
      const double threshold = 0.95 * 0.5 * (la.width + lb.width);
      const bool share_start =
          (la.centerline.front() - lb.centerline.front()).norm() < 1.0;
      const bool share_end = (la.centerline.back() - lb.centerline.back()).norm() < 1.0;
      if (share_start) continue; // diverging pair; follow relation covers it

      double entry_a = -1.0, entry_b = -1.0, exit_a = -1.0, exit_b = -1.0;
      for (size_t i = 0; i + 1 < la.centerline.size(); ++i) {
        for (size_t j = 0; j + 1 < lb.centerline.size(); ++j) {
          const double dist = segment_distance(la.centerline[i], la.centerline[i + 1],
                                               lb.centerline[j], lb.centerline[j + 1]);
          if (dist < threshold) {
            const double sa = 0.5 * (la.cum_s[i] + la.cum_s[i + 1]);
            const double sb = 0.5 * (lb.cum_s[j] + lb.cum_s[j + 1]);
            if (entry_a < 0.0 || sa < entry_a) entry_a = sa;
            if (entry_b < 0.0 || sb < entry_b) entry_b = sb;
            if (sa > exit_a) exit_a = sa;
            if (sb > exit_b) exit_b = sb;
          }
        }
      }
      if (entry_a >= 0.0) {
        conflicts_[a].push_back({b, entry_a, entry_b, exit_a, exit_b, share_end});
        conflicts_[b].push_back({a, entry_b, entry_a, exit_b, exit_a, share_end});
      }
    }
  }
}

inline void RoadNetwork::finalize() {
  report_ = ValidationReport{};
  build_indices();
  check_invariants();
  compute_connectivity();
  compute_conflicts();
  finalized_ = true;
}

} // namespace crashsearch

#endif // CRASHSEARCH_NETWORK_HPP
