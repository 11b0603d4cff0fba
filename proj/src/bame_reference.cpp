// Straightforward serial evaluations of the defining sums. Slow on purpose:
// these are the yardstick for the fast kernels in bame.cpp and cfar.cpp.

#include <cmath>

#include "ghostscope/bame.hpp"

namespace ghostscope::bame::reference {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

RangeSpectrum range_dft(const RadarCube& cube) {
  const auto& cfg = cube.config;
  const std::size_t ns = cfg.n_samples;
  RangeSpectrum spec{cfg, cube.frame_id, std::vector<cplx>(cube.data.size())};
  for (std::size_t t = 0; t < cfg.n_tx; ++t)
    for (std::size_t r = 0; r < cfg.n_rx; ++r)
      for (std::size_t m = 0; m < ns; ++m) {
        cplx acc = 0.0;
        for (std::size_t k = 0; k < ns; ++k) {
          const double w = 0.5 - 0.5 * std::cos(kTwoPi * double(k) / double(ns));
          const double ph = -kTwoPi * double((m * k) % ns) / double(ns);
          acc += w * cube.at(t, r, k) * std::polar(1.0, ph);
        }
        spec.data[spec.index(t, r, m)] = acc;
      }
  return spec;
}

RangeAngleMap virtual_array_map(const RangeSpectrum& spec, const AngleGrid& grid) {
  const auto& cfg = spec.config;
  RangeAngleMap map{grid, cfg.range_resolution, spec.n_bins(),
                    std::vector<double>(spec.n_bins() * grid.count)};
  for (std::size_t k = 0; k < spec.n_bins(); ++k)
    for (std::size_t a = 0; a < grid.count; ++a) {
      const double u = std::cos(deg2rad(grid.angle(a)));
      cplx acc = 0.0;
      for (std::size_t r = 0; r < cfg.n_rx; ++r)
        for (std::size_t t = 0; t < cfg.n_tx; ++t)
          acc += spec.at(t, r, k) *
                 std::polar(1.0, kTwoPi * (cfg.d_rx * double(r) + cfg.d_tx * double(t)) * u / cfg.wavelength);
      map.power[k * grid.count + a] = std::norm(acc);
    }
  return map;
}

BiAngularCube bi_angular_cube(const RangeSpectrum& spec, const AngleGrid& grid) {
  const auto& cfg = spec.config;
  const std::size_t na = grid.count;
  BiAngularCube cube{grid, cfg.range_resolution, spec.n_bins(),
                     std::vector<double>(spec.n_bins() * na * na)};
  for (std::size_t k = 0; k < spec.n_bins(); ++k)
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t d = 0; d < na; ++d) {
        const double ua = std::cos(deg2rad(grid.angle(a)));
        const double ud = std::cos(deg2rad(grid.angle(d)));
        cplx outer = 0.0;
        for (std::size_t r = 0; r < cfg.n_rx; ++r) {
          cplx inner = 0.0;
          for (std::size_t t = 0; t < cfg.n_tx; ++t)
            inner += spec.at(t, r, k) * std::polar(1.0, kTwoPi * double(t) * cfg.d_tx * ud / cfg.wavelength);
          outer += inner * std::polar(1.0, kTwoPi * double(r) * cfg.d_rx * ua / cfg.wavelength);
        }
        cube.power[cube.index(k, a, d)] = std::norm(outer);
      }
  return cube;
}

std::vector<unsigned char> cfar_3d_exceedances(const BiAngularCube& cube, const CfarConfig& cfg) {
  const long na = static_cast<long>(cube.grid.count);
  const long nk = static_cast<long>(cube.n_range);
  const long ga = std::lround(cfg.guard_angle_deg / cube.grid.step_deg);
  const long ta = std::lround(cfg.train_angle_deg / cube.grid.step_deg);
  const long gr = static_cast<long>(cfg.guard_range);
  const long tr = static_cast<long>(cfg.train_range);
  const long Rk = gr + tr, Ra = ga + ta;

  std::vector<unsigned char> mask(cube.power.size(), 0);
  const std::size_t n_train = static_cast<std::size_t>((2 * Rk + 1) * (2 * Ra + 1) * (2 * Ra + 1) -
                                                       (2 * gr + 1) * (2 * ga + 1) * (2 * ga + 1));
  const double alpha = cfar_alpha(cfg.pfa, n_train);
  for (long k = Rk; k < nk - Rk; ++k)
    for (long a = Ra; a < na - Ra; ++a)
      for (long d = Ra; d < na - Ra; ++d) {
        double sum = 0.0;
        for (long i = -Rk; i <= Rk; ++i)
          for (long j = -Ra; j <= Ra; ++j)
            for (long l = -Ra; l <= Ra; ++l) {
              if (std::abs(i) <= gr && std::abs(j) <= ga && std::abs(l) <= ga) continue;
              sum += cube.at(std::size_t(k + i), std::size_t(a + j), std::size_t(d + l));
            }
        const double mean = sum / double(n_train);
        const auto idx = cube.index(std::size_t(k), std::size_t(a), std::size_t(d));
        mask[idx] = cube.power[idx] > alpha * mean ? 1 : 0;
      }
  return mask;
}

}  // namespace ghostscope::bame::reference
