#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ghostscope/geom.hpp"

namespace ghostscope {

using cplx = std::complex<double>;

struct RadarConfig {
  double wavelength = 0.0039;  // 77 GHz
  std::size_t n_tx = 12;
  std::size_t n_rx = 16;
  double d_tx = 0.0039 / 2.0;
  double d_rx = 0.0039 / 2.0;
  std::size_t n_samples = 256;
  double range_resolution = 0.0375;  // 4 GHz sweep
  double noise_sigma = 18.101933598375617;  // 20 dB processed SNR, see noise_sigma_for_snr
  double bounce_attenuation = 0.5;

  double max_range() const { return static_cast<double>(n_samples) * range_resolution; }
};

/// Throws DataError when a field violates its invariant.
void validate(const RadarConfig& cfg);

/// Coherent processing gain of the range FFT (periodic Hann) plus the full
/// tx x rx beamformer: n_tx * n_rx * (sum w)^2 / sum w^2.
double processing_gain(const RadarConfig& cfg);

/// Per-sample complex noise sigma that places a matched path of the given
/// amplitude at `snr_db` above the mean noise power of the processed map.
double noise_sigma_for_snr(const RadarConfig& cfg, double snr_db, double amplitude = 1.0);

/// Dechirped samples of one frame, indexed [tx][rx][sample].
struct RadarCube {
  RadarConfig config;
  std::size_t frame_id = 0;
  std::vector<cplx> data;

  RadarCube() = default;
  RadarCube(const RadarConfig& cfg, std::size_t frame);

  std::size_t index(std::size_t tx, std::size_t rx, std::size_t k) const {
    return (tx * config.n_rx + rx) * config.n_samples + k;
  }
  cplx& at(std::size_t tx, std::size_t rx, std::size_t k) { return data[index(tx, rx, k)]; }
  const cplx& at(std::size_t tx, std::size_t rx, std::size_t k) const { return data[index(tx, rx, k)]; }
};

struct PathComponent {
  double range = 0.0;  // half round-trip path length, meters
  double aoa_deg = 90.0;
  double aod_deg = 90.0;
  double amplitude = 1.0;
};

namespace rfsim {

/// Sum of beat tones plus circular Gaussian noise (E|n|^2 = noise_sigma^2):
///   A exp(+j2pi range k / (N res)) exp(-j2pi (r d_rx cos aoa + t d_tx cos aod) / lambda)
/// The steering phase carries the propagation-delay sign, so the +j
/// beamformers in bame peak at the true angles. Deterministic given the seed.
RadarCube synthesize_cube(std::span<const PathComponent> paths, const RadarConfig& cfg,
                          std::uint64_t seed, std::size_t frame_id = 0);

/// Oracle paths for one frame with amplitude bounce_attenuation^bounces.
std::vector<PathComponent> frame_paths(const Scene& scene, std::size_t frame, const RadarConfig& cfg);

RadarCube simulate_frame(const Scene& scene, std::size_t frame, const RadarConfig& cfg,
                         std::uint64_t seed);

/// Per-frame seed derived from a master seed.
std::uint64_t frame_seed(std::uint64_t master, std::size_t frame);

}  // namespace rfsim
}  // namespace ghostscope
