#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ghostscope/geom.hpp"
#include "ghostscope/inversion.hpp"

namespace ghostscope {

/// Symmetric 2x2 matrix [[xx, xy], [xy, yy]].
struct Cov2 {
  double xx = 0.0, xy = 0.0, yy = 0.0;

  double det() const { return xx * yy - xy * xy; }
  /// Eigenvalues, larger first.
  std::pair<double, double> eigenvalues() const;
};

struct GmmModel {
  std::size_t k = 0;
  std::vector<Point2> means;
  std::vector<Cov2> covariances;
  std::vector<double> weights;
  double log_likelihood = 0.0;
  double bic = 0.0;
  std::size_t iterations = 0;
  std::vector<double> ll_trace;  // log-likelihood after each EM iteration

  /// Index of the most responsible component.
  std::size_t assign(Point2 p) const;
};

struct GmmConfig {
  std::size_t k_max = 12;
  std::size_t max_iters = 200;
  double tol = 1e-6;
  double cov_floor = 1e-6;  // m^2, lower bound on covariance eigenvalues
  std::size_t n_init = 3;
};

struct FittedLine {
  Segment2 segment;
  std::vector<std::size_t> inlier_indices;
  double residual_rms = 0.0;
};

struct RansacConfig {
  double threshold = 0.10;
  std::size_t iters = 500;
  std::size_t min_inliers = 8;
};

struct LayoutConfig {
  GmmConfig gmm;
  RansacConfig ransac;
  double min_wall_length = 1.0;  // shorter lines are treated as object faces
  double box_sigma = 0.3;        // compact-cluster limit on the major std-dev, meters
  double merge_angle_deg = 3.0;
  double merge_offset = 0.10;
  double merge_gap = 0.5;
  int order_filter = 0;  // 0 both, 1 first-bounce only, 2 second-bounce only
};

struct LayoutHypothesis {
  std::vector<FittedLine> walls;
  std::vector<Box2> objects;
  const ReflectorCloud* source = nullptr;
};

namespace layoutfit {

/// EM with k-means++ starts for every k in [1, k_max]; keeps the lowest BIC
/// among fits without empty components. Requires >= 2 k_max points.
GmmModel fit_gmm(const std::vector<Point2>& points, std::size_t k_max, std::uint64_t seed,
                 const GmmConfig& cfg = {});

/// EM for a fixed k; exposed for tests.
GmmModel fit_gmm_k(const std::vector<Point2>& points, std::size_t k, std::uint64_t seed,
                   const GmmConfig& cfg = {});

/// Largest-consensus 2-point line, refit by total least squares on its inliers.
std::optional<FittedLine> ransac_line(const std::vector<Point2>& points, const RansacConfig& cfg,
                                      std::uint64_t seed);

/// Total-least-squares line through the points (centroid, unit direction).
std::pair<Point2, Point2> tls_line(const std::vector<Point2>& points);

LayoutHypothesis fit_layout(const ReflectorCloud& cloud, const LayoutConfig& cfg, std::uint64_t seed);

}  // namespace layoutfit
}  // namespace ghostscope
