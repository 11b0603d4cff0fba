#include "ghostscope/geom.hpp"

#include <algorithm>
#include <string>

#include "ghostscope/error.hpp"

namespace ghostscope {

Point2 Segment2::direction() const {
  const Point2 d = b - a;
  const double n = norm(d);
  return {d.x / n, d.y / n};
}

Point2 Segment2::normal() const {
  const Point2 d = direction();
  return {-d.y, d.x};
}

std::vector<Segment2> Scene::reflectors() const {
  std::vector<Segment2> out(walls);
  for (const auto& o : objects) out.push_back(o.reflective);
  return out;
}

void validate(const Scene& scene) {
  auto finite = [](Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); };
  if (!finite(scene.radar)) throw DataError("scene.radar must be finite");
  for (std::size_t i = 0; i < scene.walls.size(); ++i) {
    const auto& w = scene.walls[i];
    if (!finite(w.a) || !finite(w.b) || w.length() <= 0.0)
      throw DataError("scene.walls[" + std::to_string(i) + "] is degenerate");
  }
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const auto& o = scene.objects[i];
    if (!(o.box.half_extents.x > 0.0) || !(o.box.half_extents.y > 0.0))
      throw DataError("scene.objects[" + std::to_string(i) + "].box half_extents must be > 0");
    if (o.reflective.length() <= 0.0)
      throw DataError("scene.objects[" + std::to_string(i) + "].reflective_segment is degenerate");
    if (o.box.contains(scene.radar))
      throw DataError("scene.radar lies inside scene.objects[" + std::to_string(i) + "]");
  }
  for (std::size_t f = 0; f < scene.human_path.size(); ++f) {
    const Point2 h = scene.human_path[f];
    if (!finite(h)) throw DataError("scene.human_path[" + std::to_string(f) + "] must be finite");
    for (const auto& w : scene.walls)
      if (point_segment_distance(h, w) < 1e-9)
        throw DataError("scene.human_path[" + std::to_string(f) + "] lies on a wall");
    for (const auto& o : scene.objects)
      if (o.box.contains(h))
        throw DataError("scene.human_path[" + std::to_string(f) + "] lies inside an object");
  }
}

Polar to_polar(Point2 origin, Point2 p) {
  const Point2 d = p - origin;
  return {norm(d), rad2deg(std::atan2(d.y, d.x))};
}

Point2 from_polar(Point2 origin, Polar polar) {
  const double t = deg2rad(polar.angle_deg);
  return origin + polar.range * Point2{std::cos(t), std::sin(t)};
}

double point_segment_distance(Point2 p, const Segment2& s) {
  const Point2 d = s.b - s.a;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return distance(p, s.a);
  const double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
  return distance(p, s.a + t * d);
}

double point_line_distance(Point2 p, const Segment2& s) {
  return std::abs(cross(s.direction(), p - s.a));
}

std::optional<Point2> segment_intersection(Point2 p0, Point2 p1, Point2 q0, Point2 q1, double tol) {
  const Point2 r = p1 - p0;
  const Point2 s = q1 - q0;
  const double denom = cross(r, s);
  if (denom == 0.0) return std::nullopt;  // parallel or collinear
  const Point2 qp = q0 - p0;
  const double t = cross(qp, s) / denom;
  const double u = cross(qp, r) / denom;
  if (t < -tol || t > 1.0 + tol || u < -tol || u > 1.0 + tol) return std::nullopt;
  return p0 + t * r;
}

namespace geom {

Point2 mirror_point(Point2 p, const Segment2& line) {
  const Point2 d = line.b - line.a;
  const double len2 = dot(d, d);
  if (!(len2 > 0.0)) throw DataError("mirror_point: degenerate segment");
  const double t = dot(p - line.a, d) / len2;
  const Point2 foot = line.a + t * d;
  return 2.0 * foot - p;
}

std::optional<Point2> specular_bounce_point(Point2 src, Point2 dst, const Segment2& line) {
  if (!(line.length() > 0.0)) return std::nullopt;
  const Point2 dir = line.direction();
  const double side_src = cross(dir, src - line.a);
  const double side_dst = cross(dir, dst - line.a);
  if (side_src * side_dst < 0.0) return std::nullopt;
  if (side_src == 0.0 && side_dst == 0.0) return std::nullopt;  // both on the mirror line
  const Point2 image = mirror_point(dst, line);
  return segment_intersection(src, image, line.a, line.b, 1e-12);
}

std::string_view label_name(GhostLabel label) {
  switch (label) {
    case GhostLabel::H: return "H";
    case GhostLabel::G1: return "G1";
    case GhostLabel::G1p: return "G1'";
    case GhostLabel::G2: return "G2";
    case GhostLabel::G2p: return "G2'";
  }
  return "?";
}

std::vector<GhostPath> ghost_oracle(const Scene& scene, std::size_t frame) {
  const Point2 s = scene.radar;
  const Point2 h = scene.human_path.at(frame);
  const Polar ph = to_polar(s, h);
  const double sh = ph.range;

  std::vector<GhostPath> out;
  out.push_back({GhostLabel::H, ph, ph.angle_deg, ph.angle_deg, 0, -1, h});

  const auto reflectors = scene.reflectors();
  for (std::size_t i = 0; i < reflectors.size(); ++i) {
    const auto c = specular_bounce_point(s, h, reflectors[i]);
    if (!c) continue;
    if (c->y - s.y < -1e-12) continue;  // behind the array
    const Polar pc = to_polar(s, *c);
    const double sc = pc.range;
    const double hc = distance(h, *c);
    if (sc < 1e-9 || hc < 1e-9) continue;

    const auto idx = static_cast<std::ptrdiff_t>(i);
    const double r1 = 0.5 * (sc + hc + sh);
    const double th = ph.angle_deg;
    const double tc = pc.angle_deg;
    out.push_back({GhostLabel::G1, {r1, th}, th, tc, 1, idx, *c});
    out.push_back({GhostLabel::G1p, {r1, tc}, tc, th, 1, idx, *c});
    out.push_back({GhostLabel::G2, {sh + hc, th}, th, th, 2, idx, *c});
    out.push_back({GhostLabel::G2p, {sc + hc, tc}, tc, tc, 2, idx, *c});
  }
  return out;
}

}  // namespace geom
}  // namespace ghostscope
