#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "ghostscope/bame.hpp"
#include "ghostscope/geom.hpp"
#include "ghostscope/ghostid.hpp"

namespace gs_test {

using namespace ghostscope;

inline Scene canonical_scene() {
  Scene s;
  s.radar = {0, 0};
  s.human_path = {{1, 1}};
  s.walls = {{{3, -5}, {3, 5}}};
  return s;
}

/// Map-space detections straight from the geometry oracle (what reintegrate
/// would hand to identification with perfect detection).
inline std::vector<Detection> oracle_detections(const Scene& scene, std::size_t frame) {
  std::vector<Detection> out;
  for (const auto& g : geom::ghost_oracle(scene, frame)) {
    Detection d;
    d.polar = g.polar;
    d.aoa_deg = g.aoa_deg;
    d.aod_deg = g.aod_deg;
    d.magnitude = std::pow(0.25, g.bounces);
    d.off_diagonal = std::abs(g.aoa_deg - g.aod_deg) > 1e-9;
    out.push_back(d);
  }
  return out;
}

inline std::optional<geom::GhostPath> find_label(const std::vector<geom::GhostPath>& paths,
                                                 geom::GhostLabel l) {
  for (const auto& p : paths)
    if (p.label == l) return p;
  return std::nullopt;
}

/// Random single-wall scene with radar at the origin. The wall is a long
/// segment at a random standoff and orientation in front of the radar.
inline Scene random_single_wall(std::mt19937_64& rng, double max_standoff = 5.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Scene s;
  s.radar = {0, 0};
  const double hx = -2.0 + 4.0 * u(rng), hy = 0.5 + 3.0 * u(rng);
  s.human_path = {{hx, hy}};
  const double phi = 2.0 * std::numbers::pi * u(rng);
  const Point2 n{std::cos(phi), std::sin(phi)};
  const double off = 0.5 + (max_standoff - 0.5) * u(rng);
  const Point2 foot = off * n;
  const Point2 t{-n.y, n.x};
  s.walls = {{foot - 20.0 * t, foot + 20.0 * t}};
  return s;
}

/// Direct (slow) oracle for the separation preconditions of Algorithm 1.
inline bool well_separated(const std::vector<geom::GhostPath>& paths, const IdConfig& cfg) {
  using geom::GhostLabel;
  auto h = find_label(paths, GhostLabel::H), g1 = find_label(paths, GhostLabel::G1),
       g1p = find_label(paths, GhostLabel::G1p), g2 = find_label(paths, GhostLabel::G2),
       g2p = find_label(paths, GhostLabel::G2p);
  if (!(h && g1 && g1p && g2 && g2p)) return false;
  if (std::abs(g1p->polar.angle_deg - h->polar.angle_deg) < cfg.delta_theta) return false;
  if (g1->polar.range - h->polar.range >= cfg.delta_g1) return false;
  const double r[] = {h->polar.range, g1->polar.range, g2->polar.range, g2p->polar.range};
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (std::abs(r[i] - r[j]) < cfg.delta_r) return false;
  return true;
}

}  // namespace gs_test
