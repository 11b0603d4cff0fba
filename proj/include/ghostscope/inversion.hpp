#pragma once

#include <cstddef>
#include <vector>

#include "ghostscope/geom.hpp"
#include "ghostscope/ghostid.hpp"

namespace ghostscope {

enum class BounceOrder { First = 1, Second = 2 };

struct BounceObservation {
  double sh = 0.0;          // |sh|
  double sg = 0.0;          // |sg'1| or |sg'2|
  double theta1_deg = 0.0;  // ghost / reflector direction
  double theta2_deg = 0.0;  // human direction
  BounceOrder order = BounceOrder::First;
};

struct ReflectorEstimate {
  Point2 c1;
  Point2 mirror_source;
  double sc1 = 0.0;
  std::size_t frame_id = 0;
  BounceOrder order = BounceOrder::First;
};

struct ReflectorCloud {
  std::vector<ReflectorEstimate> points;
  std::vector<Point2> trajectory;
};

struct InversionConfig {
  double epsilon = 1e-6;     // denominator floor, meters
  double max_range = 9.6;    // estimates beyond this are discarded
};

struct InversionStats {
  std::size_t accepted = 0;
  std::size_t discarded_range = 0;       // |sc1| <= 0 or beyond max_range
  std::size_t discarded_degenerate = 0;  // denominator below epsilon
};

namespace inversion {

/// |sc1| = (2 sg^2 - 2 sg sh) / (2 sg - sh cos(t2 - t1) - sh).
/// Throws DegenerateGeometry("degenerate geometry") when the denominator < eps.
double invert_first_bounce(const BounceObservation& obs, double eps = 1e-6);

/// |sc1| = (sg^2 - sh^2) / (2 sg - 2 sh cos(t2 - t1)), with sg = |hc1| + |sc1|.
double invert_second_bounce(const BounceObservation& obs, double eps = 1e-6);

/// Estimates from G1' (first order) and G2' (second order) when present. The
/// human position is rebuilt from the H detection, never from ground truth.
std::vector<ReflectorEstimate> estimate_reflector(const GhostSet& ghosts, Point2 radar,
                                                  const InversionConfig& cfg = {},
                                                  InversionStats* stats = nullptr);

ReflectorCloud accumulate(const std::vector<std::vector<ReflectorEstimate>>& per_frame,
                          std::vector<Point2> trajectory);

}  // namespace inversion
}  // namespace ghostscope
