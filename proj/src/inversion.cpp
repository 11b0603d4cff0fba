#include "ghostscope/inversion.hpp"

#include <cmath>

#include "ghostscope/error.hpp"

namespace ghostscope::inversion {

namespace {

double cos_delta(const BounceObservation& obs) {
  return std::cos(deg2rad(obs.theta2_deg - obs.theta1_deg));
}

void check_inputs(const BounceObservation& obs) {
  if (!(obs.sh >= 0.0) || !(obs.sg > 0.0) || !std::isfinite(obs.theta1_deg) || !std::isfinite(obs.theta2_deg))
    throw DataError("bounce observation has non-finite or negative fields");
}

}  // namespace

double invert_first_bounce(const BounceObservation& obs, double eps) {
  if (obs.order != BounceOrder::First) throw DataError("invert_first_bounce: observation is not first order");
  check_inputs(obs);
  const double den = 2.0 * obs.sg - obs.sh * cos_delta(obs) - obs.sh;
  if (!(den >= eps)) throw DegenerateGeometry("degenerate geometry");
  return (2.0 * obs.sg * obs.sg - 2.0 * obs.sg * obs.sh) / den;
}

double invert_second_bounce(const BounceObservation& obs, double eps) {
  if (obs.order != BounceOrder::Second) throw DataError("invert_second_bounce: observation is not second order");
  check_inputs(obs);
  const double den = 2.0 * obs.sg - 2.0 * obs.sh * cos_delta(obs);
  if (!(den >= eps)) throw DegenerateGeometry("degenerate geometry");
  return (obs.sg * obs.sg - obs.sh * obs.sh) / den;
}

std::vector<ReflectorEstimate> estimate_reflector(const GhostSet& gs, Point2 radar, const InversionConfig& cfg,
                                                  InversionStats* stats) {
  std::vector<ReflectorEstimate> out;
  const Point2 h = from_polar(radar, gs.h.polar);

  auto attempt = [&](const Detection& ghost, BounceOrder order) {
    const BounceObservation obs{gs.h.polar.range, ghost.polar.range, ghost.polar.angle_deg,
                                gs.h.polar.angle_deg, order};
    double sc1 = 0.0;
    try {
      sc1 = order == BounceOrder::First ? invert_first_bounce(obs, cfg.epsilon)
                                        : invert_second_bounce(obs, cfg.epsilon);
    } catch (const DegenerateGeometry&) {
      if (stats) ++stats->discarded_degenerate;
      return;
    }
    if (!(sc1 > 0.0) || sc1 > cfg.max_range) {
      if (stats) ++stats->discarded_range;
      return;
    }
    ReflectorEstimate est;
    est.c1 = from_polar(radar, {sc1, ghost.polar.angle_deg});
    const Point2 away = est.c1 - h;
    const double len = norm(away);
    if (len < cfg.epsilon) {
      if (stats) ++stats->discarded_degenerate;
      return;
    }
    est.mirror_source = est.c1 + (sc1 / len) * away;
    est.sc1 = sc1;
    est.frame_id = gs.frame_id;
    est.order = order;
    out.push_back(est);
    if (stats) ++stats->accepted;
  };

  if (gs.g1p) attempt(*gs.g1p, BounceOrder::First);
  if (gs.g2p) attempt(*gs.g2p, BounceOrder::Second);
  return out;
}

ReflectorCloud accumulate(const std::vector<std::vector<ReflectorEstimate>>& per_frame,
                          std::vector<Point2> trajectory) {
  ReflectorCloud cloud;
  for (const auto& frame : per_frame) cloud.points.insert(cloud.points.end(), frame.begin(), frame.end());
  cloud.trajectory = std::move(trajectory);
  return cloud;
}

}  // namespace ghostscope::inversion
