#include "ghostscope/layoutfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "ghostscope/error.hpp"
#include "ghostscope/seed.hpp"

namespace ghostscope {

std::pair<double, double> Cov2::eigenvalues() const {
  const double m = 0.5 * (xx + yy);
  const double r = std::sqrt(0.25 * (xx - yy) * (xx - yy) + xy * xy);
  return {m + r, m - r};
}

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

Cov2 clamp_eigen(const Cov2& c, double floor) {
  auto [l1, l2] = c.eigenvalues();
  if (l2 >= floor) return c;
  // unit eigenvector of l1
  double vx = 1.0, vy = 0.0;
  if (std::abs(c.xy) > 1e-300) {
    vx = l1 - c.yy;
    vy = c.xy;
    const double n = std::hypot(vx, vy);
    vx /= n;
    vy /= n;
  } else if (c.yy > c.xx) {
    vx = 0.0;
    vy = 1.0;
  }
  l1 = std::max(l1, floor);
  l2 = std::max(l2, floor);
  // V diag(l1, l2) V^T with second eigenvector (-vy, vx)
  return {l1 * vx * vx + l2 * vy * vy, (l1 - l2) * vx * vy, l1 * vy * vy + l2 * vx * vx};
}

double log_gauss(Point2 p, Point2 mu, const Cov2& c) {
  const double det = c.det();
  const double dx = p.x - mu.x, dy = p.y - mu.y;
  const double q = (c.yy * dx * dx - 2.0 * c.xy * dx * dy + c.xx * dy * dy) / det;
  return -kLog2Pi - 0.5 * std::log(det) - 0.5 * q;
}

Cov2 sample_cov(const std::vector<Point2>& pts, Point2 mean) {
  Cov2 c;
  if (pts.empty()) return c;
  for (auto p : pts) {
    const double dx = p.x - mean.x, dy = p.y - mean.y;
    c.xx += dx * dx;
    c.xy += dx * dy;
    c.yy += dy * dy;
  }
  const double n = static_cast<double>(pts.size());
  return {c.xx / n, c.xy / n, c.yy / n};
}

Point2 centroid(const std::vector<Point2>& pts) {
  Point2 m;
  for (auto p : pts) m += p;
  return (1.0 / static_cast<double>(pts.size())) * m;
}

std::vector<Point2> kmeanspp(const std::vector<Point2>& pts, std::size_t k, std::mt19937_64& rng) {
  std::vector<Point2> centers;
  std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
  centers.push_back(pts[pick(rng)]);
  std::vector<double> d2(pts.size(), std::numeric_limits<double>::infinity());
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Point2 diff = pts[i] - centers.back();
      d2[i] = std::min(d2[i], dot(diff, diff));
      total += d2[i];
    }
    if (!(total > 0.0)) {
      centers.push_back(pts[pick(rng)]);
      continue;
    }
    std::uniform_real_distribution<double> u(0.0, total);
    double target = u(rng), acc = 0.0;
    std::size_t chosen = pts.size() - 1;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      acc += d2[i];
      if (acc >= target && d2[i] > 0.0) {
        chosen = i;
        break;
      }
    }
    centers.push_back(pts[chosen]);
  }
  return centers;
}

struct EmResult {
  GmmModel model;
  bool has_empty = false;
};

EmResult run_em(const std::vector<Point2>& pts, std::size_t k, std::uint64_t seed, const GmmConfig& cfg) {
  const std::size_t n = pts.size();
  std::mt19937_64 rng(seed);
  GmmModel m;
  m.k = k;
  m.means = kmeanspp(pts, k, rng);

  {
    // hard-assignment start
    std::vector<std::vector<Point2>> groups(k);
    for (auto p : pts) {
      std::size_t best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < k; ++j) {
        const Point2 d = p - m.means[j];
        if (dot(d, d) < bd) {
          bd = dot(d, d);
          best = j;
        }
      }
      groups[best].push_back(p);
    }
    const Cov2 global = sample_cov(pts, centroid(pts));
    for (std::size_t j = 0; j < k; ++j) {
      const Cov2 c = groups[j].size() >= 2 ? sample_cov(groups[j], m.means[j]) : global;
      m.covariances.push_back(clamp_eigen(c, cfg.cov_floor));
      m.weights.push_back(std::max<double>(static_cast<double>(groups[j].size()), 1.0));
    }
    const double wsum = std::accumulate(m.weights.begin(), m.weights.end(), 0.0);
    for (auto& w : m.weights) w /= wsum;
  }

  std::vector<double> resp(n * k);
  std::vector<double> nk(k);
  auto e_step = [&]() {
    double ll = 0.0;
    std::vector<double> lw(k);
    for (std::size_t j = 0; j < k; ++j)
      lw[j] = m.weights[j] > 0.0 ? std::log(m.weights[j]) : -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < k; ++j) {
        const double v = lw[j] + (m.weights[j] > 0.0 ? log_gauss(pts[i], m.means[j], m.covariances[j]) : 0.0);
        resp[i * k + j] = v;
        mx = std::max(mx, v);
      }
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += std::exp(resp[i * k + j] - mx);
      const double lse = mx + std::log(s);
      ll += lse;
      for (std::size_t j = 0; j < k; ++j) resp[i * k + j] = std::exp(resp[i * k + j] - lse);
    }
    return ll;
  };

  double ll = e_step();
  m.ll_trace.push_back(ll);
  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0, sx = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = resp[i * k + j];
        s += r;
        sx += r * pts[i].x;
        sy += r * pts[i].y;
      }
      nk[j] = s;
      if (s < 1e-12) {
        m.weights[j] = 0.0;
        continue;
      }
      const Point2 mu{sx / s, sy / s};
      Cov2 c;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = resp[i * k + j];
        const double dx = pts[i].x - mu.x, dy = pts[i].y - mu.y;
        c.xx += r * dx * dx;
        c.xy += r * dx * dy;
        c.yy += r * dy * dy;
      }
      m.means[j] = mu;
      m.covariances[j] = clamp_eigen({c.xx / s, c.xy / s, c.yy / s}, cfg.cov_floor);
      m.weights[j] = s / static_cast<double>(n);
    }
    const double next = e_step();
    m.ll_trace.push_back(next);
    m.iterations = it + 1;
    const double delta = next - ll;
    ll = next;
    if (delta < cfg.tol) break;
  }
  m.log_likelihood = ll;

  EmResult out;
  for (std::size_t j = 0; j < k; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += resp[i * k + j];
    if (s < 1.0) out.has_empty = true;
  }
  const double p = 6.0 * static_cast<double>(k) - 1.0;
  m.bic = -2.0 * ll + p * std::log(static_cast<double>(n));
  out.model = std::move(m);
  return out;
}

EmResult best_of_inits(const std::vector<Point2>& pts, std::size_t k, std::uint64_t seed, const GmmConfig& cfg) {
  EmResult best;
  bool have = false;
  for (std::size_t init = 0; init < std::max<std::size_t>(cfg.n_init, 1); ++init) {
    auto r = run_em(pts, k, derive_seed(seed, k * 64 + init), cfg);
    const bool better = !have || (best.has_empty && !r.has_empty) ||
                        (best.has_empty == r.has_empty && r.model.log_likelihood > best.model.log_likelihood);
    if (better) {
      best = std::move(r);
      have = true;
    }
  }
  return best;
}

double line_dist(Point2 p, Point2 origin, Point2 unit_dir) { return std::abs(cross(unit_dir, p - origin)); }

}  // namespace

std::size_t GmmModel::assign(Point2 p) const {
  std::size_t best = 0;
  double bv = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < k; ++j) {
    if (!(weights[j] > 0.0)) continue;
    const double v = std::log(weights[j]) + log_gauss(p, means[j], covariances[j]);
    if (v > bv) {
      bv = v;
      best = j;
    }
  }
  return best;
}

namespace layoutfit {

GmmModel fit_gmm_k(const std::vector<Point2>& points, std::size_t k, std::uint64_t seed, const GmmConfig& cfg) {
  if (k == 0 || points.size() < k) throw DataError("fit_gmm: need at least k points");
  return best_of_inits(points, k, seed, cfg).model;
}

GmmModel fit_gmm(const std::vector<Point2>& points, std::size_t k_max, std::uint64_t seed, const GmmConfig& cfg) {
  if (k_max == 0) throw DataError("fit_gmm: k_max must be >= 1");
  if (points.size() < 2 * k_max)
    throw DataError("fit_gmm: " + std::to_string(points.size()) + " points is fewer than 2 * k_max = " +
                    std::to_string(2 * k_max));
  GmmModel best;
  bool have = false;
  for (std::size_t k = 1; k <= k_max; ++k) {
    auto r = best_of_inits(points, k, seed, cfg);
    if (r.has_empty) continue;
    if (!have || r.model.bic < best.bic) {
      best = std::move(r.model);
      have = true;
    }
  }
  return best;
}

std::pair<Point2, Point2> tls_line(const std::vector<Point2>& pts) {
  const Point2 c = centroid(pts);
  const Cov2 cov = sample_cov(pts, c);
  // principal direction
  const double theta = 0.5 * std::atan2(2.0 * cov.xy, cov.xx - cov.yy);
  return {c, {std::cos(theta), std::sin(theta)}};
}

std::optional<FittedLine> ransac_line(const std::vector<Point2>& pts, const RansacConfig& cfg, std::uint64_t seed) {
  const std::size_t n = pts.size();
  if (n < 2 || n < cfg.min_inliers) return std::nullopt;

  std::size_t best_count = 0;
  double best_sse = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_inliers, cur;

  auto evaluate = [&](std::size_t i, std::size_t j) {
    const Point2 d = pts[j] - pts[i];
    const double len = norm(d);
    if (len < 1e-12) return;
    const Point2 u = (1.0 / len) * d;
    cur.clear();
    double sse = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
      const double e = line_dist(pts[q], pts[i], u);
      if (e <= cfg.threshold) {
        cur.push_back(q);
        sse += e * e;
      }
    }
    if (cur.size() > best_count || (cur.size() == best_count && sse < best_sse)) {
      best_count = cur.size();
      best_sse = sse;
      best_inliers = cur;
    }
  };

  if (n * (n - 1) / 2 <= cfg.iters) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) evaluate(i, j);
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t it = 0; it < cfg.iters; ++it) {
      const std::size_t i = pick(rng);
      std::size_t j = pick(rng);
      while (j == i) j = pick(rng);
      evaluate(i, j);
    }
  }
  if (best_count < std::max<std::size_t>(cfg.min_inliers, 2)) return std::nullopt;

  std::vector<Point2> inl;
  for (auto i : best_inliers) inl.push_back(pts[i]);
  const auto [c, u] = tls_line(inl);
  double tmin = std::numeric_limits<double>::infinity(), tmax = -tmin, sse = 0.0;
  for (auto p : inl) {
    const double t = dot(p - c, u);
    tmin = std::min(tmin, t);
    tmax = std::max(tmax, t);
    const double e = line_dist(p, c, u);
    sse += e * e;
  }
  if (!(tmax - tmin > 1e-12)) return std::nullopt;
  FittedLine fl;
  fl.segment = {c + tmin * u, c + tmax * u};
  fl.inlier_indices = std::move(best_inliers);
  fl.residual_rms = std::sqrt(sse / static_cast<double>(inl.size()));
  return fl;
}

namespace {

FittedLine refit(const std::vector<Point2>& all, std::vector<std::size_t> idx) {
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  std::vector<Point2> pts;
  for (auto i : idx) pts.push_back(all[i]);
  const auto [c, u] = tls_line(pts);
  double tmin = std::numeric_limits<double>::infinity(), tmax = -tmin, sse = 0.0;
  for (auto p : pts) {
    const double t = dot(p - c, u);
    tmin = std::min(tmin, t);
    tmax = std::max(tmax, t);
    sse += std::pow(line_dist(p, c, u), 2);
  }
  return {{c + tmin * u, c + tmax * u}, std::move(idx), std::sqrt(sse / static_cast<double>(pts.size()))};
}

bool mergeable(const FittedLine& a, const FittedLine& b, const LayoutConfig& cfg) {
  const Point2 ua = a.segment.direction(), ub = b.segment.direction();
  const double ang = rad2deg(std::asin(std::min(1.0, std::abs(cross(ua, ub)))));
  if (ang >= cfg.merge_angle_deg) return false;
  const double off = std::max(point_line_distance(b.segment.midpoint(), a.segment),
                              point_line_distance(a.segment.midpoint(), b.segment));
  if (off >= cfg.merge_offset) return false;
  const Point2 o = a.segment.a;
  double b0 = dot(b.segment.a - o, ua), b1 = dot(b.segment.b - o, ua);
  if (b0 > b1) std::swap(b0, b1);
  const double a1 = a.segment.length();
  const double gap = std::max(0.0, std::max(0.0, b0) - std::min(a1, b1));
  return gap < cfg.merge_gap;
}

}  // namespace

LayoutHypothesis fit_layout(const ReflectorCloud& cloud, const LayoutConfig& cfg, std::uint64_t seed) {
  std::vector<Point2> pts;
  for (const auto& e : cloud.points)
    if (cfg.order_filter == 0 || static_cast<int>(e.order) == cfg.order_filter) pts.push_back(e.c1);
  if (pts.empty()) throw DataError("fit_layout: empty reflector cloud");

  LayoutHypothesis hyp;
  hyp.source = &cloud;

  const std::size_t k_max = std::max<std::size_t>(1, std::min(cfg.gmm.k_max, pts.size() / 2));
  if (pts.size() < 2) return hyp;
  const GmmModel gmm = fit_gmm(pts, k_max, seed, cfg.gmm);

  std::vector<std::vector<std::size_t>> clusters(gmm.k);
  for (std::size_t i = 0; i < pts.size(); ++i) clusters[gmm.assign(pts[i])].push_back(i);

  // Line fragments per cluster (any length). A wall split across GMM
  // components is stitched back together before the length rule applies.
  std::vector<FittedLine> lines;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    std::vector<std::size_t> remaining = clusters[c];
    for (std::size_t round = 0; remaining.size() >= cfg.ransac.min_inliers; ++round) {
      std::vector<Point2> sub;
      for (auto i : remaining) sub.push_back(pts[i]);
      auto fl = ransac_line(sub, cfg.ransac, derive_seed(seed, 1000 + c * 100 + round));
      if (!fl) break;
      std::vector<std::size_t> global, rest;
      std::vector<bool> used(remaining.size(), false);
      for (auto li : fl->inlier_indices) used[li] = true;
      for (std::size_t q = 0; q < remaining.size(); ++q) (used[q] ? global : rest).push_back(remaining[q]);
      fl->inlier_indices = global;
      lines.push_back(std::move(*fl));
      remaining = std::move(rest);
    }
  }

  for (bool merged = true; merged;) {
    merged = false;
    for (std::size_t i = 0; i < lines.size() && !merged; ++i)
      for (std::size_t j = i + 1; j < lines.size(); ++j)
        if (mergeable(lines[i], lines[j], cfg)) {
          auto idx = lines[i].inlier_indices;
          idx.insert(idx.end(), lines[j].inlier_indices.begin(), lines[j].inlier_indices.end());
          lines[i] = refit(pts, std::move(idx));
          lines.erase(lines.begin() + static_cast<long>(j));
          merged = true;
          break;
        }
  }
  std::erase_if(lines, [&](const FittedLine& l) { return l.segment.length() < cfg.min_wall_length; });

  // Clusters that contributed nothing to a wall are object candidates.
  std::vector<bool> on_wall(pts.size(), false);
  for (const auto& l : lines)
    for (auto i : l.inlier_indices) on_wall[i] = true;
  for (const auto& cl : clusters) {
    if (cl.size() < cfg.ransac.min_inliers) continue;
    if (std::any_of(cl.begin(), cl.end(), [&](std::size_t i) { return on_wall[i]; })) continue;
    std::vector<Point2> sub;
    for (auto i : cl) sub.push_back(pts[i]);
    const Point2 mu = centroid(sub);
    const Cov2 cov = sample_cov(sub, mu);
    if (std::sqrt(std::max(0.0, cov.eigenvalues().first)) < cfg.box_sigma)
      hyp.objects.push_back({mu, {std::max(2.0 * std::sqrt(cov.xx), 0.05), std::max(2.0 * std::sqrt(cov.yy), 0.05)}});
  }
  hyp.walls = std::move(lines);
  return hyp;
}

}  // namespace layoutfit
}  // namespace ghostscope
