#include "ghostscope/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ghostscope/error.hpp"

namespace ghostscope::metrics {

PointGrid::PointGrid(const std::vector<Point2>& pts, double cell) : pts_(pts), cell_(cell) {
  if (pts_.empty()) return;
  double x1 = pts_[0].x, y1 = pts_[0].y;
  x0_ = x1;
  y0_ = y1;
  for (auto p : pts_) {
    x0_ = std::min(x0_, p.x);
    y0_ = std::min(y0_, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
  nx_ = static_cast<long>((x1 - x0_) / cell_) + 1;
  ny_ = static_cast<long>((y1 - y0_) / cell_) + 1;
  std::vector<std::size_t> count(static_cast<std::size_t>(nx_ * ny_) + 1, 0);
  std::vector<std::size_t> cell_of(pts_.size());
  for (std::size_t i = 0; i < pts_.size(); ++i) {
    const long cx = std::min(nx_ - 1, static_cast<long>((pts_[i].x - x0_) / cell_));
    const long cy = std::min(ny_ - 1, static_cast<long>((pts_[i].y - y0_) / cell_));
    cell_of[i] = static_cast<std::size_t>(cy * nx_ + cx);
    ++count[cell_of[i] + 1];
  }
  for (std::size_t c = 1; c < count.size(); ++c) count[c] += count[c - 1];
  start_ = count;
  items_.resize(pts_.size());
  for (std::size_t i = 0; i < pts_.size(); ++i) items_[count[cell_of[i]]++] = i;
}

double PointGrid::nearest(Point2 q) const {
  double best = std::numeric_limits<double>::infinity();
  if (pts_.empty()) return best;
  const long cx = static_cast<long>(std::floor((q.x - x0_) / cell_));
  const long cy = static_cast<long>(std::floor((q.y - y0_) / cell_));
  // Chebyshev cell distance from the query cell to the occupied rectangle
  const long dx = cx < 0 ? -cx : (cx >= nx_ ? cx - nx_ + 1 : 0);
  const long dy = cy < 0 ? -cy : (cy >= ny_ ? cy - ny_ + 1 : 0);
  const long r0 = std::max(dx, dy);
  const long rmax = r0 + nx_ + ny_;
  auto visit = [&](long x, long y) {
    if (x < 0 || y < 0 || x >= nx_ || y >= ny_) return;
    const auto c = static_cast<std::size_t>(y * nx_ + x);
    for (std::size_t k = start_[c]; k < start_[c + 1]; ++k) best = std::min(best, distance(q, pts_[items_[k]]));
  };
  for (long r = r0; r <= rmax; ++r) {
    if (r == 0) {
      visit(cx, cy);
    } else {
      for (long i = -r; i <= r; ++i) {
        visit(cx + i, cy - r);
        visit(cx + i, cy + r);
      }
      for (long j = -r + 1; j <= r - 1; ++j) {
        visit(cx - r, cy + j);
        visit(cx + r, cy + j);
      }
    }
    if (best <= static_cast<double>(r) * cell_) break;
  }
  return best;
}

std::vector<Point2> sample_walls(const std::vector<Segment2>& walls, double spacing) {
  if (!(spacing > 0.0)) throw DataError("sample spacing must be > 0");
  std::vector<Point2> out;
  for (const auto& w : walls) {
    const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(w.length() / spacing)));
    for (std::size_t i = 0; i <= n; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(n);
      out.push_back(w.a + t * (w.b - w.a));
    }
  }
  return out;
}

namespace {

std::vector<double> nn_distances(const std::vector<Point2>& from, const std::vector<Point2>& to, double cell) {
  const PointGrid grid(to, cell);
  std::vector<double> d(from.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < from.size(); ++i) d[i] = grid.nearest(from[i]);
  return d;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double fraction_within(const std::vector<double>& v, double tol) {
  std::size_t k = 0;
  for (double x : v) k += x <= tol ? 1 : 0;
  return static_cast<double>(k) / static_cast<double>(v.size());
}

void require_non_empty(const std::vector<Segment2>& pred, const std::vector<Segment2>& gt) {
  if (pred.empty()) throw DataError("metrics: predicted wall set is empty");
  if (gt.empty()) throw DataError("metrics: ground-truth wall set is empty");
}

}  // namespace

double chamfer(const std::vector<Segment2>& pred, const std::vector<Segment2>& gt, double spacing) {
  return f1_at_tolerance(pred, gt, 0.15, spacing).chamfer;
}

LayoutMetrics f1_at_tolerance(const std::vector<Segment2>& pred, const std::vector<Segment2>& gt, double tol,
                              double spacing) {
  require_non_empty(pred, gt);
  const auto ps = sample_walls(pred, spacing);
  const auto gs = sample_walls(gt, spacing);
  const double cell = std::max(0.1, 4.0 * spacing);
  const auto dp = nn_distances(ps, gs, cell);
  const auto dg = nn_distances(gs, ps, cell);
  LayoutMetrics m;
  m.chamfer = 0.5 * (mean(dp) + mean(dg));
  m.precision = fraction_within(dp, tol);
  m.recall = fraction_within(dg, tol);
  m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

ObjectMetrics iou_dice(const std::vector<Box2>& pred, const std::vector<Box2>& gt, double resolution) {
  if (!(resolution > 0.0)) throw DataError("iou_dice: resolution must be > 0");
  if (pred.empty() && gt.empty()) return {1.0, 1.0};
  if (pred.empty() || gt.empty()) return {0.0, 0.0};

  // cell i covers [i res, (i+1) res); its center is in [lo, hi) iff i in [ceil(lo/res - 0.5), ceil(hi/res - 0.5))
  auto first = [&](double lo) { return static_cast<long>(std::ceil(lo / resolution - 0.5)); };
  long x0 = std::numeric_limits<long>::max(), y0 = x0, x1 = std::numeric_limits<long>::min(), y1 = x1;
  for (const auto* set : {&pred, &gt})
    for (const auto& b : *set) {
      x0 = std::min(x0, first(b.min_x()));
      y0 = std::min(y0, first(b.min_y()));
      x1 = std::max(x1, first(b.max_x()));
      y1 = std::max(y1, first(b.max_y()));
    }
  if (x1 <= x0 || y1 <= y0) return {1.0, 1.0};
  const long w = x1 - x0, h = y1 - y0;
  std::vector<unsigned char> mask(static_cast<std::size_t>(w * h), 0);
  auto paint = [&](const std::vector<Box2>& boxes, unsigned char bit) {
    for (const auto& b : boxes)
      for (long y = first(b.min_y()); y < first(b.max_y()); ++y)
        for (long x = first(b.min_x()); x < first(b.max_x()); ++x)
          mask[static_cast<std::size_t>((y - y0) * w + (x - x0))] |= bit;
  };
  paint(pred, 1);
  paint(gt, 2);
  std::size_t a = 0, b = 0, inter = 0, uni = 0;
  for (auto m : mask) {
    a += (m & 1) ? 1 : 0;
    b += (m & 2) ? 1 : 0;
    inter += m == 3 ? 1 : 0;
    uni += m ? 1 : 0;
  }
  if (uni == 0) return {1.0, 1.0};
  return {static_cast<double>(inter) / static_cast<double>(uni),
          2.0 * static_cast<double>(inter) / static_cast<double>(a + b)};
}

}  // namespace ghostscope::metrics
