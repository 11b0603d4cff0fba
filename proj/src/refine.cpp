#include "ghostscope/refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "ghostscope/error.hpp"

namespace ghostscope {

void validate(const RefineConfig& cfg) {
  if (!(cfg.step > 0.0)) throw DataError("refine.step must be > 0");
  if (!(cfg.wall_halfwidth >= 0.0)) throw DataError("refine.wall_halfwidth must be >= 0");
}

namespace refine {

namespace {

std::vector<Segment2> segments(const LayoutHypothesis& hyp) {
  std::vector<Segment2> out;
  for (const auto& w : hyp.walls) out.push_back(w.segment);
  return out;
}

double box_depth(const Box2& b, Point2 p) {
  return std::min(b.half_extents.x - std::abs(p.x - b.center.x), b.half_extents.y - std::abs(p.y - b.center.y));
}

// Shortest |t| outside the union of open intervals (lo, hi).
double nearest_free(std::vector<std::pair<double, double>>& iv) {
  std::sort(iv.begin(), iv.end());
  double lo = 0.0, hi = 0.0;
  bool open = false;
  for (const auto& [a, b] : iv) {
    if (open && a < hi) {
      hi = std::max(hi, b);
      continue;
    }
    if (open && lo < 0.0 && hi > 0.0) break;
    lo = a;
    hi = b;
    open = true;
  }
  if (!open || !(lo < 0.0 && hi > 0.0)) return 0.0;
  return std::min(-lo, hi);
}

// Normal shift that frees the wall from every trajectory point.
double wall_escape(const Segment2& w, const std::vector<Point2>& traj, double hw) {
  const Point2 u = w.direction(), n = w.normal();
  const double len = w.length();
  std::vector<std::pair<double, double>> iv;
  for (auto p : traj) {
    const double s = dot(p - w.a, u), d = dot(p - w.a, n);
    const double e = s < 0.0 ? -s : (s > len ? s - len : 0.0);
    if (e >= hw) continue;
    const double r = std::sqrt(hw * hw - e * e);
    iv.emplace_back(d - r, d + r);
  }
  return nearest_free(iv);
}

// Smaller of the x-only and y-only shifts that free the box.
double box_escape(const Box2& b, const std::vector<Point2>& traj) {
  std::vector<std::pair<double, double>> ix, iy;
  for (auto p : traj) {
    const double dx = p.x - b.center.x, dy = p.y - b.center.y;
    if (std::abs(dy) < b.half_extents.y) ix.emplace_back(dx - b.half_extents.x, dx + b.half_extents.x);
    if (std::abs(dx) < b.half_extents.x) iy.emplace_back(dy - b.half_extents.y, dy + b.half_extents.y);
  }
  return std::min(nearest_free(ix), nearest_free(iy));
}

double escape(const LayoutHypothesis& h, const std::vector<Point2>& traj, double hw) {
  double e = 0.0;
  for (const auto& w : h.walls) e += wall_escape(w.segment, traj, hw);
  for (const auto& b : h.objects) e += box_escape(b, traj);
  return e;
}

struct Score {
  OverlapLoss loss;
  double escape = 0.0;
  double pen = 0.0;
};

// Loss first, then distance to a collision-free pose, then penetration.
bool better(const Score& a, const Score& b) {
  if (a.loss.total != b.loss.total) return a.loss.total < b.loss.total;
  if (std::abs(a.escape - b.escape) > 1e-9) return a.escape < b.escape;
  return a.pen < b.pen - 1e-12;
}

struct Move {
  enum Kind { WallShift, BoxShiftX, BoxShiftY, BoxShrink } kind;
  std::size_t index;
  double amount;

  std::string describe() const {
    const char* names[] = {"wall_shift", "box_shift_x", "box_shift_y", "box_shrink"};
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s[%zu] %+.4f", names[kind], index, amount);
    return buf;
  }
};

void apply(LayoutHypothesis& hyp, const Move& m) {
  switch (m.kind) {
    case Move::WallShift: {
      auto& s = hyp.walls[m.index].segment;
      const Point2 off = m.amount * s.normal();
      s.a += off;
      s.b += off;
      break;
    }
    case Move::BoxShiftX:
      hyp.objects[m.index].center.x += m.amount;
      break;
    case Move::BoxShiftY:
      hyp.objects[m.index].center.y += m.amount;
      break;
    case Move::BoxShrink:
      hyp.objects[m.index].half_extents.x -= m.amount;
      hyp.objects[m.index].half_extents.y -= m.amount;
      break;
  }
}

bool element_hits(const LayoutHypothesis& h, Move::Kind kind, std::size_t i, const std::vector<Point2>& traj,
                  double hw) {
  if (kind == Move::WallShift) {
    const auto& w = h.walls[i].segment;
    return std::any_of(traj.begin(), traj.end(), [&](Point2 p) { return point_segment_distance(p, w) < hw; });
  }
  const auto& b = h.objects[i];
  return std::any_of(traj.begin(), traj.end(), [&](Point2 p) { return b.contains(p); });
}

// Smallest multiple of step (>= 2) along one direction that clears element i on its own.
std::optional<double> clearing_shift(const LayoutHypothesis& h, Move::Kind kind, std::size_t i, double sign,
                                     const std::vector<Point2>& traj, const RefineConfig& cfg) {
  constexpr int kMaxSteps = 200;
  for (int k = 2; k <= kMaxSteps; ++k) {
    LayoutHypothesis t = h;
    apply(t, {kind, i, sign * k * cfg.step});
    if (!element_hits(t, kind, i, traj, cfg.wall_halfwidth)) return sign * k * cfg.step;
  }
  return std::nullopt;
}

}  // namespace

OverlapLoss overlap_loss(const std::vector<Point2>& traj, const std::vector<Segment2>& walls,
                         const std::vector<Box2>& boxes, double halfwidth) {
  OverlapLoss l;
  for (auto p : traj) {
    if (std::any_of(walls.begin(), walls.end(), [&](const Segment2& w) { return point_segment_distance(p, w) < halfwidth; }))
      ++l.wall_hits;
    if (std::any_of(boxes.begin(), boxes.end(), [&](const Box2& b) { return b.contains(p); })) ++l.box_hits;
  }
  l.total = l.wall_hits + l.box_hits;
  return l;
}

OverlapLoss overlap_loss(const std::vector<Point2>& traj, const LayoutHypothesis& hyp, double halfwidth) {
  return overlap_loss(traj, segments(hyp), hyp.objects, halfwidth);
}

double penetration(const std::vector<Point2>& traj, const std::vector<Segment2>& walls,
                   const std::vector<Box2>& boxes, double halfwidth) {
  double total = 0.0;
  for (auto p : traj) {
    for (const auto& w : walls) total += std::max(0.0, halfwidth - point_segment_distance(p, w));
    for (const auto& b : boxes) total += std::max(0.0, box_depth(b, p));
  }
  return total;
}

RefineResult refine_layout(const LayoutHypothesis& hyp, const std::vector<Point2>& traj, const RefineConfig& cfg) {
  validate(cfg);
  RefineResult res;
  res.layout = hyp;
  LayoutHypothesis& cur = res.layout;
  auto score = [&](const LayoutHypothesis& h) {
    const auto segs = segments(h);
    return Score{overlap_loss(traj, segs, h.objects, cfg.wall_halfwidth), escape(h, traj, cfg.wall_halfwidth),
                 penetration(traj, segs, h.objects, cfg.wall_halfwidth)};
  };

  Score now = score(cur);
  res.initial = now.loss;
  res.log.push_back({0, now.loss.total, "start"});

  std::vector<Move> moves;
  for (std::size_t it = 1; it <= cfg.max_iters && now.loss.total > 0; ++it) {
    moves.clear();
    // A colliding element also gets the shortest clearing translation along each
    // of its shift directions: the sampled-trajectory count is not monotone
    // along a translation, so single steps can stall on small bumps.
    auto add_shifts = [&](Move::Kind kind, std::size_t i) {
      const bool hit = element_hits(cur, kind, i, traj, cfg.wall_halfwidth);
      for (double sign : {1.0, -1.0}) {
        moves.push_back({kind, i, sign * cfg.step});
        if (!hit) continue;
        if (auto d = clearing_shift(cur, kind, i, sign, traj, cfg)) moves.push_back({kind, i, *d});
      }
    };
    for (std::size_t i = 0; i < cur.walls.size(); ++i) add_shifts(Move::WallShift, i);
    for (std::size_t i = 0; i < cur.objects.size(); ++i) {
      add_shifts(Move::BoxShiftX, i);
      add_shifts(Move::BoxShiftY, i);
      const auto& he = cur.objects[i].half_extents;
      if (std::min(he.x, he.y) > 0.5 * cfg.step) moves.push_back({Move::BoxShrink, i, 0.5 * cfg.step});
    }

    std::vector<Score> scored(moves.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t m = 0; m < moves.size(); ++m) {
      LayoutHypothesis trial = cur;
      apply(trial, moves[m]);
      scored[m] = score(trial);
    }

    std::ptrdiff_t best = -1;
    for (std::size_t m = 0; m < moves.size(); ++m) {
      if (!better(scored[m], now)) continue;
      if (best < 0 || better(scored[m], scored[static_cast<std::size_t>(best)])) best = static_cast<std::ptrdiff_t>(m);
    }
    if (best < 0) break;
    const Move& mv = moves[static_cast<std::size_t>(best)];
    apply(cur, mv);
    now = scored[static_cast<std::size_t>(best)];
    res.log.push_back({it, now.loss.total, mv.describe()});
  }
  const OverlapLoss loss = now.loss;
  res.final_loss = loss;
  res.converged = loss.total == 0;
  return res;
}

}  // namespace refine
}  // namespace ghostscope
