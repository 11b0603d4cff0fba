#pragma once

#include <optional>
#include <vector>

#include "ghostscope/bame.hpp"

namespace ghostscope {

struct IdConfig {
  double tau = 0.4;
  double delta_r = 0.15;       // meters
  double delta_theta = 15.0;   // degrees
  double delta_g1 = 5.0;       // meters, bound on r_G1 - r_H
};

void validate(const IdConfig& cfg);

struct GhostSet {
  Detection h;
  std::optional<Detection> g1, g1p, g2, g2p;
  std::size_t frame_id = 0;
};

namespace ghostid {

/// Algorithm 1 over map-space detections (range = polar.range, angle =
/// polar.angle_deg). Ties on range go to the larger magnitude, then the
/// smaller angle; the result does not depend on input order.
/// Throws DataError on empty input or when nothing clears tau * max magnitude.
GhostSet identify(const std::vector<Detection>& dets, const IdConfig& cfg = {}, std::size_t frame_id = 0);

/// One GhostSet per distinct G1 candidate (multi-reflector frames). Sets that
/// would reuse an already claimed G1' detection are dropped.
std::vector<GhostSet> identify_all(const std::vector<Detection>& dets, const IdConfig& cfg = {},
                                   std::size_t frame_id = 0);

}  // namespace ghostid
}  // namespace ghostscope
