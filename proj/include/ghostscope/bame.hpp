#pragma once

#include <cstddef>
#include <vector>

#include "ghostscope/geom.hpp"
#include "ghostscope/rfsim.hpp"

namespace ghostscope {

/// Per-(tx, rx) range FFT output, same [tx][rx][bin] layout as RadarCube.
struct RangeSpectrum {
  RadarConfig config;
  std::size_t frame_id = 0;
  std::vector<cplx> data;

  std::size_t n_bins() const { return config.n_samples; }
  std::size_t index(std::size_t tx, std::size_t rx, std::size_t k) const {
    return (tx * config.n_rx + rx) * config.n_samples + k;
  }
  const cplx& at(std::size_t tx, std::size_t rx, std::size_t k) const { return data[index(tx, rx, k)]; }
  double bin_range(std::size_t k) const { return static_cast<double>(k) * config.range_resolution; }
};

/// Uniform angle grid in degrees: start, start + step, ...
struct AngleGrid {
  double start_deg = 0.0;
  double step_deg = 1.0;
  std::size_t count = 180;

  double angle(std::size_t i) const { return start_deg + step_deg * static_cast<double>(i); }
  /// Nearest grid index (may be out of range for angles off the grid).
  long nearest(double deg) const;
};

struct RangeAngleMap {
  AngleGrid grid;
  double range_resolution = 0.0;
  std::size_t n_range = 0;
  std::vector<double> power;  // [range][angle]

  double at(std::size_t k, std::size_t a) const { return power[k * grid.count + a]; }
};

struct BiAngularCube {
  AngleGrid grid;  // shared by the AOA and AOD axes
  double range_resolution = 0.0;
  std::size_t n_range = 0;
  std::vector<double> power;  // [range][aoa][aod]

  std::size_t index(std::size_t k, std::size_t a, std::size_t d) const {
    return (k * grid.count + a) * grid.count + d;
  }
  double at(std::size_t k, std::size_t a, std::size_t d) const { return power[index(k, a, d)]; }
};

struct Detection {
  Polar polar;  // range and map-space angle
  double aoa_deg = 0.0;
  double aod_deg = 0.0;
  double magnitude = 0.0;  // linear power
  bool off_diagonal = false;
  std::size_t range_bin = 0;
  std::size_t aoa_bin = 0;
  std::size_t aod_bin = 0;
};

/// Window sizes are in range bins and degrees; degrees are converted to grid
/// cells by rounding. min_relative_power drops detections weaker than that
/// fraction of the strongest one (0 disables it).
struct CfarConfig {
  std::size_t guard_range = 1;
  double guard_angle_deg = 2.0;
  std::size_t train_range = 4;
  double train_angle_deg = 8.0;
  double pfa = 1e-3;
  double merge_angle_deg = 2.0;
  std::size_t merge_range = 1;
  double min_relative_power = 0.0;
};

struct CfarScan {
  std::vector<Detection> detections;
  std::size_t cells_tested = 0;
  std::size_t exceedances = 0;  // cells above alpha * training mean
  double alpha = 0.0;
};

namespace bame {

/// Per-channel DFT over fast time with a periodic Hann window (unnormalised).
RangeSpectrum range_fft(const RadarCube& cube);

/// S(theta) = |sum_r sum_t s_tr exp(+j2pi (d_r r + d_t t) cos theta / lambda)|^2.
RangeAngleMap virtual_array_map(const RangeSpectrum& spec, const AngleGrid& grid = {});

/// S(aoa, aod) = |sum_r (sum_t s_tr exp(+j2pi t d_t cos aod / lambda)) exp(+j2pi r d_r cos aoa / lambda)|^2.
/// Transmit indices pair with AOD and receive indices with AOA.
BiAngularCube bi_angular_cube(const RangeSpectrum& spec, const AngleGrid& grid = {});

/// CA-CFAR threshold factor for `n_train` exponential training cells.
double cfar_alpha(double pfa, std::size_t n_train);

/// 3D cell-averaging CFAR with local-maximum picking and merging.
CfarScan cfar_3d_scan(const BiAngularCube& cube, const CfarConfig& cfg);
std::vector<Detection> cfar_3d(const BiAngularCube& cube, const CfarConfig& cfg);

/// 2D counterpart over a range-angle map; detections have aoa == aod.
CfarScan cfar_2d_scan(const RangeAngleMap& map, const CfarConfig& cfg);
std::vector<Detection> cfar_2d(const RangeAngleMap& map, const CfarConfig& cfg);

/// Off-diagonal detections (|aoa - aod| > tol) become two map-space entries at
/// angle = aoa and angle = aod; diagonal ones pass through at angle = aoa.
std::vector<Detection> reintegrate(const std::vector<Detection>& dets, double tol_deg = 15.0);

/// Serial references kept for tests and benchmarks. They evaluate the
/// defining sums literally and share no code with the fast kernels.
namespace reference {

RangeSpectrum range_dft(const RadarCube& cube);
RangeAngleMap virtual_array_map(const RangeSpectrum& spec, const AngleGrid& grid = {});
BiAngularCube bi_angular_cube(const RangeSpectrum& spec, const AngleGrid& grid = {});
/// Brute-force window sums; returns the exceedance mask over the full cube.
std::vector<unsigned char> cfar_3d_exceedances(const BiAngularCube& cube, const CfarConfig& cfg);

}  // namespace reference
}  // namespace bame
}  // namespace ghostscope
