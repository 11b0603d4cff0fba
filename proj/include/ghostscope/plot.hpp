#pragma once

#include <string>
#include <vector>

#include "ghostscope/geom.hpp"

namespace ghostscope::plot {

struct MapDot {
  Point2 p;
  double weight = 1.0;  // 0..1, drawn as opacity
};

struct Figure {
  std::vector<Segment2> gt_walls;
  std::vector<Box2> gt_boxes;
  std::vector<Segment2> walls;
  std::vector<Box2> boxes;
  std::vector<Point2> trajectory;
  std::vector<Point2> cloud;
  std::vector<MapDot> map;
  std::vector<Point2> radars;
};

/// Deterministic SVG: fixed number formatting, fixed layer order.
std::string render_svg(const Figure& fig, double pixels_per_meter = 80.0);

}  // namespace ghostscope::plot
