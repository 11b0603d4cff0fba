#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ghostscope/bame.hpp"
#include "ghostscope/error.hpp"

namespace ghostscope::bame {

namespace {

struct Dims3 {
  std::size_t nk, na, nd;
};

// Box sum along the contiguous (last) axis, clipped at the line ends.
void box_pass_last(const std::vector<double>& src, std::vector<double>& dst, Dims3 dims, long radius) {
  const std::size_t lines = dims.nk * dims.na;
  const long n = static_cast<long>(dims.nd);
#pragma omp parallel
  {
    std::vector<double> prefix(dims.nd + 1);
#pragma omp for schedule(static)
    for (std::size_t line = 0; line < lines; ++line) {
      const double* in = &src[line * dims.nd];
      double* out = &dst[line * dims.nd];
      prefix[0] = 0.0;
      for (long i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + in[i];
      for (long i = 0; i < n; ++i)
        out[i] = prefix[std::min(n, i + radius + 1)] - prefix[std::max(0L, i - radius)];
    }
  }
}

// Box sum along the middle axis, one slab at a time.
void box_pass_middle(const std::vector<double>& src, std::vector<double>& dst, Dims3 dims, long radius) {
  const long n = static_cast<long>(dims.na);
  const std::size_t nd = dims.nd;
#pragma omp parallel
  {
    std::vector<double> prefix((dims.na + 1) * nd);
#pragma omp for schedule(static)
    for (std::size_t k = 0; k < dims.nk; ++k) {
      const double* slab = &src[k * dims.na * nd];
      std::fill(prefix.begin(), prefix.begin() + static_cast<long>(nd), 0.0);
      for (long a = 0; a < n; ++a)
        for (std::size_t d = 0; d < nd; ++d)
          prefix[(a + 1) * nd + d] = prefix[a * nd + d] + slab[a * nd + d];
      double* out = &dst[k * dims.na * nd];
      for (long a = 0; a < n; ++a) {
        const double* hi = &prefix[std::min(n, a + radius + 1) * nd];
        const double* lo = &prefix[std::max(0L, a - radius) * nd];
        for (std::size_t d = 0; d < nd; ++d) out[a * nd + d] = hi[d] - lo[d];
      }
    }
  }
}

// Box sum along the outer axis as a running window over slabs; each thread
// owns a contiguous chunk of the slab so the inner loop stays unit-stride.
void box_pass_outer(const std::vector<double>& src, std::vector<double>& dst, Dims3 dims, long radius) {
  const long n = static_cast<long>(dims.nk);
  const std::size_t slab = dims.na * dims.nd;
  constexpr std::size_t chunk = 2048;
  const std::size_t n_chunks = (slab + chunk - 1) / chunk;
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < n_chunks; ++c) {
    const std::size_t i0 = c * chunk, i1 = std::min(slab, i0 + chunk);
    double acc[chunk] = {};
    for (long j = 0; j < std::min(n, radius); ++j) {
      const double* in = &src[std::size_t(j) * slab];
      for (std::size_t i = i0; i < i1; ++i) acc[i - i0] += in[i];
    }
    for (long k = 0; k < n; ++k) {
      if (k + radius < n) {
        const double* in = &src[std::size_t(k + radius) * slab];
        for (std::size_t i = i0; i < i1; ++i) acc[i - i0] += in[i];
      }
      if (k - radius - 1 >= 0) {
        const double* in = &src[std::size_t(k - radius - 1) * slab];
        for (std::size_t i = i0; i < i1; ++i) acc[i - i0] -= in[i];
      }
      double* out = &dst[std::size_t(k) * slab];
      for (std::size_t i = i0; i < i1; ++i) out[i] = acc[i - i0];
    }
  }
}

void box_sum_3d(const std::vector<double>& src, std::vector<double>& dst, std::vector<double>& tmp,
                Dims3 dims, long rk, long ra, long rd) {
  box_pass_last(src, dst, dims, rd);
  box_pass_middle(dst, tmp, dims, ra);
  box_pass_outer(tmp, dst, dims, rk);
}

struct Candidate {
  std::size_t k, a, d;
  double power;
};

std::vector<Candidate> merge_candidates(std::vector<Candidate> cands, long merge_k, long merge_a,
                                        double min_relative) {
  std::sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
    if (x.power != y.power) return x.power > y.power;
    if (x.k != y.k) return x.k < y.k;
    if (x.a != y.a) return x.a < y.a;
    return x.d < y.d;
  });
  std::vector<Candidate> kept;
  for (const auto& c : cands) {
    const bool absorbed = std::any_of(kept.begin(), kept.end(), [&](const Candidate& s) {
      return std::labs(long(c.k) - long(s.k)) <= merge_k && std::labs(long(c.a) - long(s.a)) <= merge_a &&
             std::labs(long(c.d) - long(s.d)) <= merge_a;
    });
    if (!absorbed) kept.push_back(c);
  }
  if (!kept.empty() && min_relative > 0.0) {
    const double floor = kept.front().power * min_relative;
    std::erase_if(kept, [&](const Candidate& c) { return c.power < floor; });
  }
  return kept;
}

}  // namespace

double cfar_alpha(double pfa, std::size_t n_train) {
  if (!(pfa > 0.0 && pfa < 1.0)) throw DataError("cfar: pfa must lie in (0, 1)");
  if (n_train == 0) throw DataError("cfar: empty training window");
  const double n = static_cast<double>(n_train);
  return n * (std::pow(pfa, -1.0 / n) - 1.0);
}

CfarScan cfar_3d_scan(const BiAngularCube& cube, const CfarConfig& cfg) {
  const Dims3 dims{cube.n_range, cube.grid.count, cube.grid.count};
  const long ga = std::lround(cfg.guard_angle_deg / cube.grid.step_deg);
  const long ta = std::lround(cfg.train_angle_deg / cube.grid.step_deg);
  const long gr = static_cast<long>(cfg.guard_range);
  const long tr = static_cast<long>(cfg.train_range);
  const long Rk = gr + tr, Ra = ga + ta;
  if (2 * Rk + 1 > static_cast<long>(dims.nk) || 2 * Ra + 1 > static_cast<long>(dims.na))
    throw DataError("cfar_3d: cube is smaller than the guard+training window");

  const std::size_t n_outer = static_cast<std::size_t>((2 * Rk + 1) * (2 * Ra + 1) * (2 * Ra + 1));
  const std::size_t n_inner = static_cast<std::size_t>((2 * gr + 1) * (2 * ga + 1) * (2 * ga + 1));
  const std::size_t n_train = n_outer - n_inner;

  CfarScan scan;
  scan.alpha = cfar_alpha(cfg.pfa, n_train);

  // Scratch is reused across calls; fresh 3 x 66 MB buffers per frame cost more in page faults than the sums.
  thread_local std::vector<double> outer, inner, tmp;
  outer.resize(cube.power.size());
  inner.resize(cube.power.size());
  tmp.resize(cube.power.size());
  box_sum_3d(cube.power, outer, tmp, dims, Rk, Ra, Ra);
  box_sum_3d(cube.power, inner, tmp, dims, gr, ga, ga);

  const long nk = static_cast<long>(dims.nk), na = static_cast<long>(dims.na);
  std::vector<Candidate> cands;
  std::size_t exceed = 0;
#pragma omp parallel
  {
    std::vector<Candidate> local;
    std::size_t local_exceed = 0;
#pragma omp for schedule(static) nowait
    for (long k = Rk; k < nk - Rk; ++k)
      for (long a = Ra; a < na - Ra; ++a)
        for (long d = Ra; d < na - Ra; ++d) {
          const auto idx = cube.index(std::size_t(k), std::size_t(a), std::size_t(d));
          const double mean = std::max(0.0, outer[idx] - inner[idx]) / static_cast<double>(n_train);
          const double p = cube.power[idx];
          if (!(p > scan.alpha * mean)) continue;
          ++local_exceed;
          bool is_max = true;
          for (long i = -1; i <= 1 && is_max; ++i)
            for (long j = -1; j <= 1 && is_max; ++j)
              for (long l = -1; l <= 1; ++l) {
                if (i == 0 && j == 0 && l == 0) continue;
                if (cube.at(std::size_t(k + i), std::size_t(a + j), std::size_t(d + l)) > p) {
                  is_max = false;
                  break;
                }
              }
          if (is_max) local.push_back({std::size_t(k), std::size_t(a), std::size_t(d), p});
        }
#pragma omp critical
    {
      cands.insert(cands.end(), local.begin(), local.end());
      exceed += local_exceed;
    }
  }
  scan.cells_tested = static_cast<std::size_t>((nk - 2 * Rk) * (na - 2 * Ra) * (na - 2 * Ra));
  scan.exceedances = exceed;

  const long merge_a = std::lround(cfg.merge_angle_deg / cube.grid.step_deg);
  for (const auto& c : merge_candidates(std::move(cands), long(cfg.merge_range), merge_a, cfg.min_relative_power)) {
    Detection det;
    det.range_bin = c.k;
    det.aoa_bin = c.a;
    det.aod_bin = c.d;
    det.aoa_deg = cube.grid.angle(c.a);
    det.aod_deg = cube.grid.angle(c.d);
    det.polar = {static_cast<double>(c.k) * cube.range_resolution, det.aoa_deg};
    det.magnitude = c.power;
    scan.detections.push_back(det);
  }
  return scan;
}

std::vector<Detection> cfar_3d(const BiAngularCube& cube, const CfarConfig& cfg) {
  return cfar_3d_scan(cube, cfg).detections;
}

CfarScan cfar_2d_scan(const RangeAngleMap& map, const CfarConfig& cfg) {
  const long nk = static_cast<long>(map.n_range), na = static_cast<long>(map.grid.count);
  const long ga = std::lround(cfg.guard_angle_deg / map.grid.step_deg);
  const long ta = std::lround(cfg.train_angle_deg / map.grid.step_deg);
  const long gr = static_cast<long>(cfg.guard_range);
  const long tr = static_cast<long>(cfg.train_range);
  const long Rk = gr + tr, Ra = ga + ta;
  if (2 * Rk + 1 > nk || 2 * Ra + 1 > na)
    throw DataError("cfar_2d: map is smaller than the guard+training window");

  const std::size_t n_train =
      static_cast<std::size_t>((2 * Rk + 1) * (2 * Ra + 1) - (2 * gr + 1) * (2 * ga + 1));
  CfarScan scan;
  scan.alpha = cfar_alpha(cfg.pfa, n_train);

  // Reuse the 3D passes with a singleton middle axis.
  const Dims3 dims{map.n_range, 1, map.grid.count};
  std::vector<double> outer(map.power.size()), inner(map.power.size()), tmp(map.power.size());
  box_sum_3d(map.power, outer, tmp, dims, Rk, 0, Ra);
  box_sum_3d(map.power, inner, tmp, dims, gr, 0, ga);

  std::vector<Candidate> cands;
  for (long k = Rk; k < nk - Rk; ++k)
    for (long a = Ra; a < na - Ra; ++a) {
      const auto idx = std::size_t(k * na + a);
      const double mean = std::max(0.0, outer[idx] - inner[idx]) / static_cast<double>(n_train);
      const double p = map.power[idx];
      ++scan.cells_tested;
      if (!(p > scan.alpha * mean)) continue;
      ++scan.exceedances;
      bool is_max = true;
      for (long i = -1; i <= 1 && is_max; ++i)
        for (long j = -1; j <= 1; ++j)
          if ((i || j) && map.at(std::size_t(k + i), std::size_t(a + j)) > p) {
            is_max = false;
            break;
          }
      if (is_max) cands.push_back({std::size_t(k), std::size_t(a), std::size_t(a), p});
    }

  const long merge_a = std::lround(cfg.merge_angle_deg / map.grid.step_deg);
  for (const auto& c : merge_candidates(std::move(cands), long(cfg.merge_range), merge_a, cfg.min_relative_power)) {
    Detection det;
    det.range_bin = c.k;
    det.aoa_bin = det.aod_bin = c.a;
    det.aoa_deg = det.aod_deg = map.grid.angle(c.a);
    det.polar = {static_cast<double>(c.k) * map.range_resolution, det.aoa_deg};
    det.magnitude = c.power;
    scan.detections.push_back(det);
  }
  return scan;
}

std::vector<Detection> cfar_2d(const RangeAngleMap& map, const CfarConfig& cfg) {
  return cfar_2d_scan(map, cfg).detections;
}

}  // namespace ghostscope::bame
