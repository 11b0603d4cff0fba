#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string_view>
#include <vector>

namespace ghostscope {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Point2& operator+=(Point2 o) { x += o.x; y += o.y; return *this; }
  constexpr Point2& operator-=(Point2 o) { x -= o.x; y -= o.y; return *this; }
  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend constexpr Point2 operator*(Point2 p, double s) { return {s * p.x, s * p.y}; }
  friend constexpr bool operator==(Point2, Point2) = default;
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

constexpr double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
constexpr double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

/// Range/angle as seen from the radar. The array lies along +x and the radar
/// faces +y, so visible targets have angle in [0, 180) and broadside is 90.
struct Polar {
  double range = 0.0;      // meters
  double angle_deg = 0.0;  // degrees from the array axis
};

struct Segment2 {
  Point2 a;
  Point2 b;

  double length() const { return distance(a, b); }
  Point2 direction() const;  // unit vector a -> b
  Point2 normal() const;     // unit left normal
  Point2 midpoint() const { return 0.5 * (a + b); }
};

struct Box2 {
  Point2 center;
  Point2 half_extents;  // (hx, hy), both > 0

  double min_x() const { return center.x - half_extents.x; }
  double max_x() const { return center.x + half_extents.x; }
  double min_y() const { return center.y - half_extents.y; }
  double max_y() const { return center.y + half_extents.y; }
  /// Strict interior test; boundary points are outside.
  bool contains(Point2 p) const {
    return std::abs(p.x - center.x) < half_extents.x && std::abs(p.y - center.y) < half_extents.y;
  }
};

struct SceneObject {
  Box2 box;
  Segment2 reflective;  // the one specular face; other edges are transparent
};

struct Scene {
  Point2 radar;
  std::vector<Point2> human_path;  // one position per frame
  std::vector<Segment2> walls;
  std::vector<SceneObject> objects;
  double frame_rate_hz = 20.0;

  /// Walls first, then each object's reflective segment.
  std::vector<Segment2> reflectors() const;
};

/// Checks the scene invariants; throws DataError naming the offending element.
void validate(const Scene& scene);

Polar to_polar(Point2 origin, Point2 p);
Point2 from_polar(Point2 origin, Polar polar);

/// Distance from p to the closed segment.
double point_segment_distance(Point2 p, const Segment2& s);
/// Distance from p to the infinite line through s.
double point_line_distance(Point2 p, const Segment2& s);
/// Parametric intersection of segments p0->p1 and q0->q1 (closed, with tolerance).
std::optional<Point2> segment_intersection(Point2 p0, Point2 p1, Point2 q0, Point2 q1,
                                           double tol = 1e-12);

namespace geom {

/// Reflection of p across the infinite line through `line`. Throws DataError
/// for a degenerate segment.
Point2 mirror_point(Point2 p, const Segment2& line);

/// Specular reflection point on `line` for the path src -> C -> dst. Absent
/// when src and dst are on opposite sides, or when the mirror-image
/// intersection falls outside the segment.
std::optional<Point2> specular_bounce_point(Point2 src, Point2 dst, const Segment2& line);

enum class GhostLabel { H, G1, G1p, G2, G2p };
std::string_view label_name(GhostLabel label);

struct GhostPath {
  GhostLabel label = GhostLabel::H;
  Polar polar;           // reported (range, angle); angle equals aoa
  double aoa_deg = 0.0;
  double aod_deg = 0.0;
  int bounces = 0;       // extra bounces relative to the direct return
  std::ptrdiff_t reflector = -1;  // index into Scene::reflectors(), -1 for H
  Point2 bounce_point;   // C1 (undefined for H)
};

/// Exact H, G1, G1', G2, G2' geometry for one frame. Ranges are reported as the
/// radar would: H |sh|, G1/G1' half the three-leg sum, G2 |sh|+|hc1|,
/// G2' |sc1|+|hc1|. Reflectors whose bounce point is absent, behind the radar,
/// or coincident with the radar or human are skipped.
std::vector<GhostPath> ghost_oracle(const Scene& scene, std::size_t frame);

}  // namespace geom
}  // namespace ghostscope
