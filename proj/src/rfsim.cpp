#include "ghostscope/rfsim.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "ghostscope/error.hpp"
#include "ghostscope/seed.hpp"

namespace ghostscope {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

void validate(const RadarConfig& cfg) {
  if (cfg.n_tx < 2 || cfg.n_rx < 2) throw DataError("radar: n_tx and n_rx must be >= 2");
  if (cfg.n_samples < 8) throw DataError("radar: n_samples must be >= 8");
  if (!(cfg.wavelength > 0.0)) throw DataError("radar: wavelength must be > 0");
  if (!(cfg.d_tx > 0.0) || !(cfg.d_rx > 0.0)) throw DataError("radar: element spacing must be > 0");
  if (!(cfg.range_resolution > 0.0)) throw DataError("radar: range_resolution must be > 0");
  if (!(cfg.noise_sigma >= 0.0)) throw DataError("radar: noise_sigma must be >= 0");
  if (!(cfg.bounce_attenuation >= 0.0)) throw DataError("radar: bounce_attenuation must be >= 0");
}

double processing_gain(const RadarConfig& cfg) {
  double s1 = 0.0, s2 = 0.0;
  const auto n = static_cast<double>(cfg.n_samples);
  for (std::size_t k = 0; k < cfg.n_samples; ++k) {
    const double w = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(k) / n);
    s1 += w;
    s2 += w * w;
  }
  return static_cast<double>(cfg.n_tx * cfg.n_rx) * s1 * s1 / s2;
}

double noise_sigma_for_snr(const RadarConfig& cfg, double snr_db, double amplitude) {
  return amplitude * std::sqrt(processing_gain(cfg) / std::pow(10.0, snr_db / 10.0));
}

RadarCube::RadarCube(const RadarConfig& cfg, std::size_t frame)
    : config(cfg), frame_id(frame), data(cfg.n_tx * cfg.n_rx * cfg.n_samples) {}

namespace rfsim {

std::uint64_t frame_seed(std::uint64_t master, std::size_t frame) {
  return splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(frame) + 0x632be59bd9b4e019ULL));
}

RadarCube synthesize_cube(std::span<const PathComponent> paths, const RadarConfig& cfg,
                          std::uint64_t seed, std::size_t frame_id) {
  validate(cfg);
  const double rmax = cfg.max_range();
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto& p = paths[i];
    if (!(p.range >= 0.0) || !(p.range < rmax)) {
      std::ostringstream os;
      os << "path " << i << " range " << p.range << " m is outside the unambiguous range [0, "
         << rmax << ")";
      throw DataError(os.str());
    }
    if (!(p.amplitude >= 0.0)) throw DataError("path " + std::to_string(i) + " has negative amplitude");
  }

  RadarCube cube(cfg, frame_id);
  const std::size_t nt = cfg.n_tx, nr = cfg.n_rx, ns = cfg.n_samples;
  std::vector<cplx> tone(ns), srx(nr), stx(nt);
  for (const auto& p : paths) {
    // beat frequency in cycles/sample: (2 range) / (N * 2 res)
    const double fb = p.range / (static_cast<double>(ns) * cfg.range_resolution);
    for (std::size_t k = 0; k < ns; ++k)
      tone[k] = std::polar(p.amplitude, kTwoPi * fb * static_cast<double>(k));
    const double ua = std::cos(deg2rad(p.aoa_deg));
    const double ud = std::cos(deg2rad(p.aod_deg));
    for (std::size_t r = 0; r < nr; ++r)
      srx[r] = std::polar(1.0, -kTwoPi * static_cast<double>(r) * cfg.d_rx * ua / cfg.wavelength);
    for (std::size_t t = 0; t < nt; ++t)
      stx[t] = std::polar(1.0, -kTwoPi * static_cast<double>(t) * cfg.d_tx * ud / cfg.wavelength);
    for (std::size_t t = 0; t < nt; ++t)
      for (std::size_t r = 0; r < nr; ++r) {
        const cplx w = stx[t] * srx[r];
        cplx* row = &cube.at(t, r, 0);
        for (std::size_t k = 0; k < ns; ++k) row[k] += w * tone[k];
      }
  }

  if (cfg.noise_sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, cfg.noise_sigma / std::sqrt(2.0));
    for (auto& v : cube.data) {
      const double re = n01(rng);
      const double im = n01(rng);
      v += cplx(re, im);
    }
  }
  return cube;
}

std::vector<PathComponent> frame_paths(const Scene& scene, std::size_t frame, const RadarConfig& cfg) {
  std::vector<PathComponent> out;
  for (const auto& g : geom::ghost_oracle(scene, frame)) {
    const double amp = std::pow(cfg.bounce_attenuation, g.bounces);
    out.push_back({g.polar.range, g.aoa_deg, g.aod_deg, amp});
  }
  return out;
}

RadarCube simulate_frame(const Scene& scene, std::size_t frame, const RadarConfig& cfg,
                         std::uint64_t seed) {
  if (frame >= scene.human_path.size())
    throw DataError("frame " + std::to_string(frame) + " is outside the trajectory");
  const auto paths = frame_paths(scene, frame, cfg);
  return synthesize_cube(paths, cfg, seed, frame);
}

}  // namespace rfsim
}  // namespace ghostscope
