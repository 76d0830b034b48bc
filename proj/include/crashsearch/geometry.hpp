#ifndef CRASHSEARCH_GEOMETRY_HPP
#define CRASHSEARCH_GEOMETRY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace crashsearch {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kEarthRadiusM = 6371000.0;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double k) const { return {x * k, y * k}; }
  bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }
  Vec2 normalized() const {
    const double n = norm();
    return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
  }
  // 90 degrees counter-clockwise; the "left" normal of a direction vector.
  Vec2 left() const { return {-y, x}; }
  double heading() const { return std::atan2(y, x); }
};

inline Vec2 unit_from_heading(double heading) {
  return {std::cos(heading), std::sin(heading)};
}

/// Wraps an angle to [-pi, pi).
inline double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a - kPi;
}

inline double angle_diff(double a, double b) { return wrap_angle(a - b); }

// ---------------------------------------------------------------------------
// Polylines

/// Cumulative arclengths; result[0] = 0, result.back() = total length.
inline std::vector<double> cumulative_arclength(const std::vector<Vec2>& pts) {
  std::vector<double> s(pts.size(), 0.0);
  for (size_t i = 1; i < pts.size(); ++i) {
    s[i] = s[i - 1] + (pts[i] - pts[i - 1]).norm();
  }
  return s;
}

inline double polyline_length(const std::vector<Vec2>& pts) {
  double total = 0.0;
  for (size_t i = 1; i < pts.size(); ++i) total += (pts[i] - pts[i - 1]).norm();
  return total;
}

struct PolylineProjection {
  double s = 0.0;        // arclength of the closest point, clamped to [0, L]
  double d = 0.0;        // signed lateral offset, positive = left of direction
  double distance = 0.0; // unsigned distance to the closest point
  size_t segment = 0;    // index of the segment holding the projection
};

/// Closest-point projection of `p` onto the polyline.
inline PolylineProjection project_onto_polyline(const std::vector<Vec2>& pts,
                                                const std::vector<double>& cum_s,
                                                const Vec2& p) {
  PolylineProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vec2 a = pts[i];
    const Vec2 ab = pts[i + 1] - a;
    const double len2 = ab.squared_norm();
    double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    const Vec2 q = a + ab * t;
    const double dist = (p - q).norm();
    if (dist < best.distance) {
      const Vec2 dir = ab.normalized();
      best.distance = dist;
      best.s = cum_s[i] + std::sqrt(len2) * t;
      best.d = dir.cross(p - q) >= 0.0 ? dist : -dist;
      best.segment = i;
    }
  }
  return best;
}

/// Point at arclength s (clamped to the polyline extent).
inline Vec2 point_at_arclength(const std::vector<Vec2>& pts,
                               const std::vector<double>& cum_s, double s) {
  if (s <= 0.0) return pts.front();
  if (s >= cum_s.back()) return pts.back();
  const auto it = std::upper_bound(cum_s.begin(), cum_s.end(), s);
  const size_t i = static_cast<size_t>(it - cum_s.begin()) - 1;
  const double seg_len = cum_s[i + 1] - cum_s[i];
  const double t = seg_len > 0.0 ? (s - cum_s[i]) / seg_len : 0.0;
  return pts[i] + (pts[i + 1] - pts[i]) * t;
}

inline Vec2 tangent_at_arclength(const std::vector<Vec2>& pts,
                                 const std::vector<double>& cum_s, double s) {
  size_t i = 0;
  if (s >= cum_s.back()) {
    i = pts.size() - 2;
  } else if (s > 0.0) {
    const auto it = std::upper_bound(cum_s.begin(), cum_s.end(), s);
    i = static_cast<size_t>(it - cum_s.begin()) - 1;
  }
  return (pts[i + 1] - pts[i]).normalized();
}

/// Local curvature from the turn between adjacent segments. Zero on straights
/// and at the ends.
inline double curvature_at_arclength(const std::vector<Vec2>& pts,
                                     const std::vector<double>& cum_s, double s) {
  if (pts.size() < 3) return 0.0;
  size_t i = 0;
  if (s >= cum_s.back()) {
    i = pts.size() - 2;
  } else if (s > 0.0) {
    const auto it = std::upper_bound(cum_s.begin(), cum_s.end(), s);
    i = static_cast<size_t>(it - cum_s.begin()) - 1;
  }
  // Turn angle at the vertex ahead of segment i, spread over the mean of the
  // adjacent segment lengths.
  const size_t v = std::min(i + 1, pts.size() - 2);
  const Vec2 t0 = (pts[v] - pts[v - 1]).normalized();
  const Vec2 t1 = (pts[v + 1] - pts[v]).normalized();
  const double dpsi = wrap_angle(t1.heading() - t0.heading());
  const double ds = 0.5 * ((pts[v] - pts[v - 1]).norm() + (pts[v + 1] - pts[v]).norm());
  return ds > 0.0 ? dpsi / ds : 0.0;
}

/// Minimum distance between two segments a0-a1 and b0-b1.
inline double segment_distance(const Vec2& a0, const Vec2& a1, const Vec2& b0,
                               const Vec2& b1) {
  auto point_seg = [](const Vec2& p, const Vec2& q0, const Vec2& q1) {
    const Vec2 d = q1 - q0;
    const double len2 = d.squared_norm();
    const double t = len2 > 0.0 ? std::clamp((p - q0).dot(d) / len2, 0.0, 1.0) : 0.0;
    return (p - (q0 + d * t)).norm();
  };
  const Vec2 da = a1 - a0, db = b1 - b0;
  const double denom = da.cross(db);
  if (std::abs(denom) > 1e-12) {
    const double t = (b0 - a0).cross(db) / denom;
    const double u = (b0 - a0).cross(da) / denom;
    if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) return 0.0;
  }
  return std::min(std::min(point_seg(a0, b0, b1), point_seg(a1, b0, b1)),
                  std::min(point_seg(b0, a0, a1), point_seg(b1, a0, a1)));
}

// ---------------------------------------------------------------------------
// Oriented rectangles (vehicle footprints)

struct Obb {
  Vec2 center;
  double half_length = 0.0; // along heading
  double half_width = 0.0;
  double heading = 0.0;

  std::array<Vec2, 4> corners() const {
    const Vec2 u = unit_from_heading(heading);
    const Vec2 v = u.left();
    const Vec2 e1 = u * half_length;
    const Vec2 e2 = v * half_width;
    return {center + e1 + e2, center + e1 - e2, center - e1 - e2, center - e1 + e2};
  }
};

/// Separating-axis overlap test. Returns the penetration depth (minimum
/// overlap across the four candidate axes) when the boxes intersect, and a
/// negative value (the widest separation found) otherwise.
inline double obb_penetration(const Obb& a, const Obb& b) {
  const std::array<Vec2, 4> axes = {
      unit_from_heading(a.heading), unit_from_heading(a.heading).left(),
      unit_from_heading(b.heading), unit_from_heading(b.heading).left()};
  const auto ca = a.corners();
  const auto cb = b.corners();
  double min_overlap = std::numeric_limits<double>::infinity();
  for (const Vec2& axis : axes) {
    double amin = std::numeric_limits<double>::infinity(), amax = -amin;
    double bmin = amin, bmax = -amin;
    for (const Vec2& c : ca) {
      const double p = c.dot(axis);
      amin = std::min(amin, p);
      amax = std::max(amax, p);
    }
    for (const Vec2& c : cb) {
      const double p = c.dot(axis);
      bmin = std::min(bmin, p);
      bmax = std::max(bmax, p);
    }
    const double overlap = std::min(amax, bmax) - std::max(amin, bmin);
    min_overlap = std::min(min_overlap, overlap);
    if (overlap < 0.0) return overlap; // separating axis found
  }
  return min_overlap;
}

inline bool obb_overlap(const Obb& a, const Obb& b) {
  return obb_penetration(a, b) >= 0.0;
}

inline bool point_in_obb(const Vec2& p, const Obb& o) {
  const Vec2 u = unit_from_heading(o.heading);
  const Vec2 rel = p - o.center;
  return std::abs(rel.dot(u)) <= o.half_length && std::abs(rel.cross(u)) <= o.half_width;
}

/// Centroid of the intersection polygon of two overlapping boxes
/// (Sutherland-Hodgman clip). Falls back to the midpoint of the centers for
/// degenerate contact.
inline Vec2 obb_overlap_centroid(const Obb& a, const Obb& b) {
  const auto ac = a.corners();
  std::vector<Vec2> poly(ac.begin(), ac.end());
  const auto bc = b.corners();
  for (int i = 0; i < 4; ++i) {
    const Vec2 e0 = bc[i];
    const Vec2 e1 = bc[(i + 1) % 4];
    const Vec2 edge = e1 - e0;
    std::vector<Vec2> out;
    for (size_t j = 0; j < poly.size(); ++j) {
      const Vec2 cur = poly[j];
      const Vec2 nxt = poly[(j + 1) % poly.size()];
      const double side_cur = edge.cross(cur - e0);
      const double side_nxt = edge.cross(nxt - e0);
      if (side_cur <= 0.0) out.push_back(cur);
      if ((side_cur < 0.0) != (side_nxt < 0.0) && side_cur != side_nxt) {
        const double t = side_cur / (side_cur - side_nxt);
        out.push_back(cur + (nxt - cur) * t);
      }
      // Note: cross > 0 means outside; b's corners run clockwise in its frame.
    }
    poly = std::move(out);
    if (poly.empty()) break;
  }
  if (poly.size() < 3) return (a.center + b.center) * 0.5;
  double area2 = 0.0;
  Vec2 c{0.0, 0.0};
  for (size_t j = 0; j < poly.size(); ++j) {
    const Vec2 p = poly[j];
    const Vec2 q = poly[(j + 1) % poly.size()];
    const double w = p.cross(q);
    area2 += w;
    c = c + (p + q) * w;
  }
  if (std::abs(area2) < 1e-12) return (a.center + b.center) * 0.5;
  return c * (1.0 / (3.0 * area2));
}

// ---------------------------------------------------------------------------
// Equirectangular projection about a fixed origin. Adequate for extents well
// under 10 km, which is the regime of all bundled and imported maps.

struct GeoProjection {
  double origin_lat_deg = 0.0;
  double origin_lon_deg = 0.0;

  Vec2 to_local(double lat_deg, double lon_deg) const {
    const double rad = kPi / 180.0;
    const double x = kEarthRadiusM * (lon_deg - origin_lon_deg) * rad *
                     std::cos(origin_lat_deg * rad);
    const double y = kEarthRadiusM * (lat_deg - origin_lat_deg) * rad;
    return {x, y};
  }

  std::pair<double, double> to_geo(const Vec2& p) const {
    const double rad = kPi / 180.0;
    const double lat = origin_lat_deg + p.y / (kEarthRadiusM * rad);
    const double lon =
        origin_lon_deg + p.x / (kEarthRadiusM * rad * std::cos(origin_lat_deg * rad));
    return {lat, lon};
  }
};

} // namespace crashsearch

#endif // CRASHSEARCH_GEOMETRY_HPP
