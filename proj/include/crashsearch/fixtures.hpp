#ifndef CRASHSEARCH_FIXTURES_HPP
#define CRASHSEARCH_FIXTURES_HPP

#include "crashsearch/network.hpp"
#include "crashsearch/vehicle.hpp"

namespace crashsearch {

namespace fixture_detail {

inline std::vector<Vec2> bezier(const Vec2& p0, const Vec2& p1, const Vec2& p2, int n = 8) {
  std::vector<Vec2> pts;
  pts.reserve(static_cast<size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    const double u = 1.0 - t;
    pts.push_back(p0 * (u * u) + p1 * (2.0 * u * t) + p2 * (t * t));
  }
  return pts;
}

inline std::vector<Vec2> arc(const Vec2& center, double radius, double a0, double a1,
                             int n = 10) {
  std::vector<Vec2> pts;
  pts.reserve(static_cast<size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    const double a = a0 + (a1 - a0) * static_cast<double>(i) / n;
    pts.push_back(center + Vec2{radius * std::cos(a), radius * std::sin(a)});
  }
  return pts;
}

struct Builder {
  RoadNetwork net;
  int node_seq = 0;

  NodeId add_node(const Vec2& p) {
    const NodeId id = "n" + std::to_string(node_seq++);
    net.nodes.push_back({id, p});
    return id;
  }

  Lane& add_edge(const std::string& id, std::vector<Vec2> centerline, double width,
                 double speed) {
    const NodeId from = add_node(centerline.front());
    const NodeId to = add_node(centerline.back());
    RoadEdge edge;
    edge.id = id;
    edge.from = from;
    edge.to = to;
    Lane lane;
    lane.id = id + "_l0";
    lane.width = width;
    lane.speed_limit = speed;
    lane.centerline = std::move(centerline);
    edge.lanes.push_back(std::move(lane));
    net.edges.push_back(std::move(edge));
    return net.edges.back().lanes.back();
  }

  void link(Lane& from, const Lane& to) { from.successors.push_back(to.id); }

  RoadNetwork build() {
    net.finalize();
    return std::move(net);
  }
};

} // namespace fixture_detail

/// Four-way unsignalized intersection: 100 m arms, one lane per direction,
/// straight/left/right connectors through a 12 m junction box.
inline RoadNetwork make_cross_intersection() {
  using namespace fixture_detail;
  Builder b;
  const double arm = 112.0, box = 12.0, half = 1.75, w = 3.5;
  const double v_arm = 13.9, v_straight = 13.9, v_turn = 6.0;

  // Arm axes: E=+x, N=+y, W=-x, S=-y. Right-hand traffic: a lane keeps the
  // right side of its travel direction.
  struct Arm {
    const char* name;
    Vec2 dir; // pointing outward from the center
  };
  const std::vector<Arm> arms = {
      {"e", {1, 0}}, {"n", {0, 1}}, {"w", {-1, 0}}, {"s", {0, -1}}};

  std::map<std::string, Lane*> in_lane, out_lane;
  for (const Arm& a : arms) {
    const Vec2 right_in = Vec2{a.dir.y, -a.dir.x} * -1.0; // right of inbound travel
    // Inbound: from the far end toward the box, travel direction -a.dir.
    const Vec2 in_off = right_in * half;
    in_lane[a.name] = &b.add_edge(std::string("in_") + a.name,
                                  {a.dir * arm + in_off, a.dir * box + in_off}, w, v_arm);
    // Outbound: from the box outward, travel direction +a.dir.
    const Vec2 out_off = Vec2{a.dir.y, -a.dir.x} * half; // right of outbound travel
    out_lane[a.name] = &b.add_edge(std::string("out_") + a.name,
                                   {a.dir * box + out_off, a.dir * arm + out_off}, w,
                                   v_arm);
  }

  // Connectors: for each inbound lane, straight across plus left and right
  // turns (no U-turns). Control point = intersection of the two lane axes.
  const std::map<std::string, std::string> opposite = {
      {"e", "w"}, {"w", "e"}, {"n", "s"}, {"s", "n"}};
  const std::map<std::string, std::string> left_of = {
      {"e", "s"}, {"s", "w"}, {"w", "n"}, {"n", "e"}};
  const std::map<std::string, std::string> right_of = {
      {"e", "n"}, {"n", "w"}, {"w", "s"}, {"s", "e"}};

  for (const Arm& a : arms) {
    Lane& in = *in_lane[a.name];
    const Vec2 start = in.centerline.back();
    auto connect = [&](const std::string& to_arm, double speed, const char* tag) {
      Lane& out = *out_lane[to_arm];
      const Vec2 end = out.centerline.front();
      std::vector<Vec2> pts;
      if (to_arm == opposite.at(a.name)) {
        pts = {start, end};
      } else {
        // Axis intersection of the inbound line and the outbound line.
        const Vec2 in_dir = (start - in.centerline.front()).normalized();
        const Vec2 out_dir =
            (out.centerline.back() - out.centerline.front()).normalized();
        // Solve start + t*in_dir = end - u*out_dir.
        const double denom = in_dir.cross(out_dir);
        const double t = (end - start).cross(out_dir) / denom;
        pts = bezier(start, start + in_dir * t, end, 8);
      }
      Lane& conn = b.add_edge("c_" + std::string(a.name) + "_" + tag, pts, w, speed);
      b.link(conn, out);
      in.successors.push_back(conn.id);
    };
    connect(opposite.at(a.name), v_straight, "straight");
    connect(right_of.at(a.name), v_turn, "right");
    connect(left_of.at(a.name), v_turn, "left");
  }
  return b.build();
}

/// Three-arm T junction (arms E, W, S), same construction rules.
inline RoadNetwork make_t_junction() {
  using namespace fixture_detail;
  Builder b;
  const double arm = 112.0, box = 12.0, half = 1.75, w = 3.5;
  const double v_arm = 13.9, v_turn = 6.0;

  struct Arm {
    const char* name;
    Vec2 dir;
  };
  const std::vector<Arm> arms = {{"e", {1, 0}}, {"w", {-1, 0}}, {"s", {0, -1}}};
  std::map<std::string, Lane*> in_lane, out_lane;
  for (const Arm& a : arms) {
    const Vec2 in_off = Vec2{a.dir.y, -a.dir.x} * -half;
    in_lane[a.name] = &b.add_edge(std::string("in_") + a.name,
                                  {a.dir * arm + in_off, a.dir * box + in_off}, w, v_arm);
    const Vec2 out_off = Vec2{a.dir.y, -a.dir.x} * half;
    out_lane[a.name] = &b.add_edge(std::string("out_") + a.name,
                                   {a.dir * box + out_off, a.dir * arm + out_off}, w,
                                   v_arm);
  }
  auto connect = [&](const std::string& from, const std::string& to, double speed,
                     bool straight) {
    Lane& in = *in_lane[from];
    Lane& out = *out_lane[to];
    const Vec2 start = in.centerline.back();
    const Vec2 end = out.centerline.front();
    std::vector<Vec2> pts;
    if (straight) {
      pts = {start, end};
    } else {
      const Vec2 in_dir = (start - in.centerline.front()).normalized();
      const Vec2 out_dir = (out.centerline.back() - out.centerline.front()).normalized();
      const double denom = in_dir.cross(out_dir);
      const double t = (end - start).cross(out_dir) / denom;
      pts = bezier(start, start + in_dir * t, end, 8);
    }
    Lane& conn = b.add_edge("c_" + from + "_" + to, pts, w, speed);
    b.link(conn, out);
    in.successors.push_back(conn.id);
  };
  connect("e", "w", 13.9, true);
  connect("w", "e", 13.9, true);
  connect("e", "s", v_turn, false);
  connect("w", "s", v_turn, false);
  connect("s", "e", v_turn, false);
  connect("s", "w", v_turn, false);
  return b.build();
}

/// Narrow two-lane corridor with a gentle S-bend, 300 m, opposing traffic.
inline RoadNetwork make_corridor() {
  using namespace fixture_detail;
  Builder b;
  const double w = 3.0, half = 1.5, v = 11.1;
  std::vector<Vec2> axis;
  for (int i = 0; i <= 30; ++i) {
    const double x = 10.0 * i;
    axis.push_back({x, 5.0 * std::sin(x * kPi / 150.0)});
  }
  auto offset = [&](double side) {
    std::vector<Vec2> pts(axis.size());
    for (size_t i = 0; i < axis.size(); ++i) {
      Vec2 dir;
      if (i == 0) {
        dir = (axis[1] - axis[0]).normalized();
      } else if (i + 1 == axis.size()) {
        dir = (axis[i] - axis[i - 1]).normalized();
      } else {
        dir = ((axis[i + 1] - axis[i]).normalized() + (axis[i] - axis[i - 1]).normalized())
                  .normalized();
      }
      pts[i] = axis[i] + dir.left() * side;
    }
    return pts;
  };
  // Eastbound keeps the south side, westbound the north side.
  b.add_edge("east", offset(-half), w, v);
  auto west_pts = offset(half);
  std::reverse(west_pts.begin(), west_pts.end());
  b.add_edge("west", west_pts, w, v);
  return b.build();
}

/// Four-arm roundabout: 15 m ring circulating counter-clockwise, merge and
/// exit tangents 25 degrees off each arm axis.
inline RoadNetwork make_roundabout() {
  using namespace fixture_detail;
  Builder b;
  const double ring_r = 15.0, arm = 95.0, arm_start = 22.0, half = 1.75, w = 3.5;
  const double v_arm = 11.1, v_ring = 8.0;
  const double off = 25.0 * kPi / 180.0;

  struct ArmSpec {
    const char* name;
    double angle; // arm axis angle from center
  };
  const std::vector<ArmSpec> arms = {
      {"e", 0.0}, {"n", kPi / 2}, {"w", kPi}, {"s", -kPi / 2}};

  // Ring nodes at angle +/- 25 deg around each arm: exit before, merge after
  // (in circulation order).
  std::map<std::string, Lane*> in_lane, out_lane;
  std::map<std::string, Lane*> seg_gap, seg_pass; // ring segments
  for (const ArmSpec& a : arms) {
    const Vec2 dir = unit_from_heading(a.angle);
    const Vec2 in_off = Vec2{dir.y, -dir.x} * -half;
    in_lane[a.name] = &b.add_edge(std::string("in_") + a.name,
                                  {dir * arm + in_off, dir * arm_start + in_off}, w,
                                  v_arm);
    const Vec2 out_off = Vec2{dir.y, -dir.x} * half;
    out_lane[a.name] = &b.add_edge(std::string("out_") + a.name,
                                   {dir * arm_start + out_off, dir * arm + out_off}, w,
                                   v_arm);
  }
  // Segments: "pass" spans exit->merge across an arm (angle-off .. angle+off),
  // "gap" spans merge of one arm to exit of the next (angle+off .. next-off).
  const std::vector<std::string> order = {"e", "n", "w", "s"};
  for (size_t i = 0; i < 4; ++i) {
    const double a0 = arms[i].angle;
    const double a1 = arms[(i + 1) % 4].angle;
    const double a1u = a1 > a0 ? a1 : a1 + 2 * kPi; // unwrap ccw
    seg_pass[order[i]] = &b.add_edge("ring_pass_" + order[i],
                                     arc({0, 0}, ring_r, a0 - off, a0 + off, 6), w,
                                     v_ring);
    seg_gap[order[i]] = &b.add_edge("ring_gap_" + order[i],
                                    arc({0, 0}, ring_r, a0 + off, a1u - off, 8), w,
                                    v_ring);
  }
  for (size_t i = 0; i < 4; ++i) {
    const std::string cur = order[i];
    const std::string nxt = order[(i + 1) % 4];
    b.link(*seg_pass[cur], *seg_gap[cur]);  // past the arm, on to the next exit
    b.link(*seg_gap[cur], *seg_pass[nxt]);  // gap ends at next arm's exit point
  }

  for (size_t i = 0; i < 4; ++i) {
    const ArmSpec& a = arms[i];
    const std::string cur = order[i];
    // Merge connector: inbound end -> ring point at angle+off, tangent to the
    // ring; joins seg_gap[cur] (which starts at the merge point).
    {
      Lane& in = *in_lane[cur];
      const Vec2 start = in.centerline.back();
      const Vec2 merge_pt = Vec2{ring_r * std::cos(a.angle + off),
                                 ring_r * std::sin(a.angle + off)};
      const Vec2 ring_tan = unit_from_heading(a.angle + off + kPi / 2);
      const Vec2 in_dir = (start - in.centerline.front()).normalized();
      const double denom = in_dir.cross(ring_tan);
      const double t = (merge_pt - start).cross(ring_tan) / denom;
      Lane& conn = b.add_edge("merge_" + cur,
                              bezier(start, start + in_dir * t, merge_pt, 8), w, v_ring);
      b.link(conn, *seg_gap[cur]);
      in.successors.push_back(conn.id);
    }
    // Exit connector: ring point at angle-off -> outbound start; successor of
    // seg_gap of the previous arm (which ends at the exit point).
    {
      Lane& out = *out_lane[cur];
      const Vec2 exit_pt = Vec2{ring_r * std::cos(a.angle - off),
                                ring_r * std::sin(a.angle - off)};
      const Vec2 ring_tan = unit_from_heading(a.angle - off + kPi / 2);
      const Vec2 end = out.centerline.front();
      const Vec2 out_dir = (out.centerline.back() - out.centerline.front()).normalized();
      const double denom = ring_tan.cross(out_dir);
      const double t = (end - exit_pt).cross(out_dir) / denom;
      Lane& conn = b.add_edge("exit_" + cur,
                              bezier(exit_pt, exit_pt + ring_tan * t, end, 8), w, v_ring);
      b.link(conn, *out_lane[cur]);
      const std::string prev = order[(i + 3) % 4];
      b.link(*seg_gap[prev], conn);
    }
  }
  return b.build();
}

inline RoadNetwork make_fixture(const std::string& name) {
  if (name == "intersection") return make_cross_intersection();
  if (name == "t_junction") return make_t_junction();
  if (name == "corridor") return make_corridor();
  if (name == "roundabout") return make_roundabout();
  throw ConfigError("unknown fixture '" + name + "'");
}

inline const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names = {"intersection", "t_junction", "corridor",
                                                 "roundabout"};
  return names;
}

} // namespace crashsearch

#endif // CRASHSEARCH_FIXTURES_HPP
