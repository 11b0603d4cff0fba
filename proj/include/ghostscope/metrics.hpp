#pragma once

#include <vector>

#include "ghostscope/geom.hpp"

namespace ghostscope {

struct LayoutMetrics {
  double chamfer = 0.0;  // meters
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct ObjectMetrics {
  double iou = 0.0;
  double dice = 0.0;
};

namespace metrics {

/// Points every `spacing` along each segment, endpoints included.
std::vector<Point2> sample_walls(const std::vector<Segment2>& walls, double spacing);

/// Symmetric mean of the two directional mean nearest-neighbour distances
/// between wall samples. Throws DataError if either side is empty.
double chamfer(const std::vector<Segment2>& pred, const std::vector<Segment2>& gt, double spacing = 0.02);

/// Precision / recall of samples within `tol` of the other side, plus chamfer.
LayoutMetrics f1_at_tolerance(const std::vector<Segment2>& pred, const std::vector<Segment2>& gt,
                              double tol = 0.15, double spacing = 0.02);

/// Scene-level IoU and Dice of the rasterised box unions. Pixels are cells of
/// a grid aligned to multiples of `resolution`; a cell is set when its center
/// lies in [min, max) of a box on both axes.
ObjectMetrics iou_dice(const std::vector<Box2>& pred, const std::vector<Box2>& gt, double resolution = 0.02);

/// Nearest-neighbour index over a point set (uniform hash grid).
class PointGrid {
 public:
  PointGrid(const std::vector<Point2>& pts, double cell);
  /// Distance to the nearest stored point; infinity when empty.
  double nearest(Point2 q) const;

 private:
  std::vector<Point2> pts_;
  double cell_;
  double x0_ = 0.0, y0_ = 0.0;
  long nx_ = 0, ny_ = 0;
  std::vector<std::size_t> start_;  // CSR offsets per cell
  std::vector<std::size_t> items_;
};

}  // namespace metrics
}  // namespace ghostscope
