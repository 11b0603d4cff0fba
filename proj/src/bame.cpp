#include "ghostscope/bame.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

namespace ghostscope {

long AngleGrid::nearest(double deg) const {
  return std::lround((deg - start_deg) / step_deg);
}

namespace bame {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Steering table laid out [element][angle], split into real and imaginary parts.
struct Steering {
  std::vector<double> re, im;
};

Steering steering_table(std::size_t n_elem, double spacing, double wavelength, const AngleGrid& grid) {
  Steering s;
  s.re.resize(n_elem * grid.count);
  s.im.resize(n_elem * grid.count);
  for (std::size_t e = 0; e < n_elem; ++e)
    for (std::size_t a = 0; a < grid.count; ++a) {
      const double ph = kTwoPi * static_cast<double>(e) * spacing *
                        std::cos(deg2rad(grid.angle(a))) / wavelength;
      s.re[e * grid.count + a] = std::cos(ph);
      s.im[e * grid.count + a] = std::sin(ph);
    }
  return s;
}

}  // namespace

RangeSpectrum range_fft(const RadarCube& cube) {
  const auto& cfg = cube.config;
  const std::size_t ns = cfg.n_samples;
  const std::size_t channels = cfg.n_tx * cfg.n_rx;

  RangeSpectrum spec{cfg, cube.frame_id, std::vector<cplx>(cube.data.size())};
  std::vector<cplx> windowed(cube.data.size());
  std::vector<double> w(ns);
  for (std::size_t k = 0; k < ns; ++k)
    w[k] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(k) / static_cast<double>(ns));
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t k = 0; k < ns; ++k) windowed[c * ns + k] = cube.data[c * ns + k] * w[k];

  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    int n = static_cast<int>(ns);
    plan = fftw_plan_many_dft(1, &n, static_cast<int>(channels),
                              reinterpret_cast<fftw_complex*>(windowed.data()), nullptr, 1, n,
                              reinterpret_cast<fftw_complex*>(spec.data.data()), nullptr, 1, n,
                              FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return spec;
}

RangeAngleMap virtual_array_map(const RangeSpectrum& spec, const AngleGrid& grid) {
  const auto& cfg = spec.config;
  const std::size_t nt = cfg.n_tx, nr = cfg.n_rx, nb = spec.n_bins(), na = grid.count;
  const Steering wt = steering_table(nt, cfg.d_tx, cfg.wavelength, grid);
  const Steering wr = steering_table(nr, cfg.d_rx, cfg.wavelength, grid);

  RangeAngleMap map{grid, cfg.range_resolution, nb, std::vector<double>(nb * na)};
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < nb; ++k) {
    for (std::size_t a = 0; a < na; ++a) {
      double zr = 0.0, zi = 0.0;
      for (std::size_t r = 0; r < nr; ++r) {
        double yr = 0.0, yi = 0.0;
        for (std::size_t t = 0; t < nt; ++t) {
          const cplx x = spec.at(t, r, k);
          const double cr = wt.re[t * na + a], ci = wt.im[t * na + a];
          yr += x.real() * cr - x.imag() * ci;
          yi += x.real() * ci + x.imag() * cr;
        }
        const double cr = wr.re[r * na + a], ci = wr.im[r * na + a];
        zr += yr * cr - yi * ci;
        zi += yr * ci + yi * cr;
      }
      map.power[k * na + a] = zr * zr + zi * zi;
    }
  }
  return map;
}

BiAngularCube bi_angular_cube(const RangeSpectrum& spec, const AngleGrid& grid) {
  const auto& cfg = spec.config;
  const std::size_t nt = cfg.n_tx, nr = cfg.n_rx, nb = spec.n_bins(), na = grid.count;
  const Steering wt = steering_table(nt, cfg.d_tx, cfg.wavelength, grid);
  const Steering wr = steering_table(nr, cfg.d_rx, cfg.wavelength, grid);

  BiAngularCube cube{grid, cfg.range_resolution, nb, std::vector<double>(nb * na * na)};
#pragma omp parallel
  {
    // Y[r][aod] = sum_t s_tr wt_t(aod); Z[aoa][aod] = sum_r wr_r(aoa) Y[r][aod]
    std::vector<double> yre(nr * na), yim(nr * na), zre(na), zim(na);
#pragma omp for schedule(static)
    for (std::size_t k = 0; k < nb; ++k) {
      for (std::size_t r = 0; r < nr; ++r) {
        double* __restrict__ yr = &yre[r * na];
        double* __restrict__ yi = &yim[r * na];
        for (std::size_t d = 0; d < na; ++d) yr[d] = yi[d] = 0.0;
        for (std::size_t t = 0; t < nt; ++t) {
          const cplx x = spec.at(t, r, k);
          const double xr = x.real(), xi = x.imag();
          const double* __restrict__ cr = &wt.re[t * na];
          const double* __restrict__ ci = &wt.im[t * na];
          for (std::size_t d = 0; d < na; ++d) {
            yr[d] += xr * cr[d] - xi * ci[d];
            yi[d] += xr * ci[d] + xi * cr[d];
          }
        }
      }
      double* out = &cube.power[k * na * na];
      for (std::size_t a = 0; a < na; ++a) {
        double* __restrict__ zr = zre.data();
        double* __restrict__ zi = zim.data();
        for (std::size_t d = 0; d < na; ++d) zr[d] = zi[d] = 0.0;
        for (std::size_t r = 0; r < nr; ++r) {
          const double cr = wr.re[r * na + a], ci = wr.im[r * na + a];
          const double* __restrict__ yr = &yre[r * na];
          const double* __restrict__ yi = &yim[r * na];
          for (std::size_t d = 0; d < na; ++d) {
            zr[d] += cr * yr[d] - ci * yi[d];
            zi[d] += cr * yi[d] + ci * yr[d];
          }
        }
        double* __restrict__ row = out + a * na;
        for (std::size_t d = 0; d < na; ++d) row[d] = zr[d] * zr[d] + zi[d] * zi[d];
      }
    }
  }
  return cube;
}

std::vector<Detection> reintegrate(const std::vector<Detection>& dets, double tol_deg) {
  std::vector<Detection> out;
  out.reserve(2 * dets.size());
  for (const auto& d : dets) {
    if (std::abs(d.aoa_deg - d.aod_deg) > tol_deg) {
      Detection at_aoa = d, at_aod = d;
      at_aoa.off_diagonal = at_aod.off_diagonal = true;
      at_aoa.polar.angle_deg = d.aoa_deg;
      at_aod.polar.angle_deg = d.aod_deg;
      out.push_back(at_aoa);
      out.push_back(at_aod);
    } else {
      Detection pass = d;
      pass.polar.angle_deg = d.aoa_deg;
      out.push_back(pass);
    }
  }
  return out;
}

}  // namespace bame
}  // namespace ghostscope
