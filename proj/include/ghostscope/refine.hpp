#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ghostscope/layoutfit.hpp"

namespace ghostscope {

struct OverlapLoss {
  std::size_t wall_hits = 0;
  std::size_t box_hits = 0;
  std::size_t total = 0;
};

struct RefineConfig {
  double wall_halfwidth = 0.10;
  std::size_t max_iters = 500;
  double step = 0.05;
  std::uint64_t seed = 0;  // unused by the deterministic search; kept for config symmetry
};

void validate(const RefineConfig& cfg);

struct RefineLogEntry {
  std::size_t iter = 0;
  std::size_t loss = 0;
  std::string move;
};

struct RefineResult {
  LayoutHypothesis layout;
  OverlapLoss initial;
  OverlapLoss final_loss;
  bool converged = false;  // final loss is zero
  std::vector<RefineLogEntry> log;
};

namespace refine {

/// A point counts once for walls if it is strictly closer than the halfwidth
/// to any wall, and once for boxes if it is strictly inside any box.
OverlapLoss overlap_loss(const std::vector<Point2>& traj, const std::vector<Segment2>& walls,
                         const std::vector<Box2>& boxes, double wall_halfwidth);

OverlapLoss overlap_loss(const std::vector<Point2>& traj, const LayoutHypothesis& hyp, double wall_halfwidth);

/// Summed penetration depth of colliding points; the greedy tie-break.
double penetration(const std::vector<Point2>& traj, const std::vector<Segment2>& walls,
                   const std::vector<Box2>& boxes, double wall_halfwidth);

/// Greedy search over wall normal shifts (+-step), box shifts (+-step per axis)
/// and box shrink (step/2 per half extent). A colliding element also gets the
/// shortest multiple of step along each shift direction that clears it on its
/// own (up to 200 steps). Moves are ranked by loss, then by
/// the summed distance each element must travel to clear the trajectory, then
/// by penetration. The best move is applied only if it ranks strictly better
/// than the current layout.
RefineResult refine_layout(const LayoutHypothesis& hyp, const std::vector<Point2>& traj,
                           const RefineConfig& cfg = {});

}  // namespace refine
}  // namespace ghostscope
