#include "ghostscope/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

namespace ghostscope::plot {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

std::string render_svg(const Figure& fig, double ppm) {
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
  auto grow = [&](Point2 p) {
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  };
  for (const auto* set : {&fig.gt_walls, &fig.walls})
    for (const auto& s : *set) {
      grow(s.a);
      grow(s.b);
    }
  for (const auto* set : {&fig.gt_boxes, &fig.boxes})
    for (const auto& b : *set) {
      grow({b.min_x(), b.min_y()});
      grow({b.max_x(), b.max_y()});
    }
  for (const auto* set : {&fig.trajectory, &fig.cloud, &fig.radars})
    for (auto p : *set) grow(p);
  for (const auto& d : fig.map) grow(d.p);
  if (!(x1 >= x0)) x0 = y0 = -1.0, x1 = y1 = 1.0;
  const double margin = 0.5;
  x0 -= margin;
  y0 -= margin;
  x1 += margin;
  y1 += margin;

  auto X = [&](double x) { return fmt((x - x0) * ppm); };
  auto Y = [&](double y) { return fmt((y1 - y) * ppm); };
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt((x1 - x0) * ppm) + "\" height=\"" +
       fmt((y1 - y0) * ppm) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  auto rect = [&](const Box2& b, const char* cls) {
    s += "<rect class=\"" + std::string(cls) + "\" x=\"" + X(b.min_x()) + "\" y=\"" + Y(b.max_y()) + "\" width=\"" +
         fmt(2 * b.half_extents.x * ppm) + "\" height=\"" + fmt(2 * b.half_extents.y * ppm) + "\"/>\n";
  };
  auto line = [&](const Segment2& w, const char* cls) {
    s += "<path class=\"" + std::string(cls) + "\" d=\"M " + X(w.a.x) + " " + Y(w.a.y) + " L " + X(w.b.x) + " " +
         Y(w.b.y) + "\"/>\n";
  };

  s += "<g id=\"map\" fill=\"#d95f02\" stroke=\"none\">\n";
  for (const auto& d : fig.map)
    s += "<circle cx=\"" + X(d.p.x) + "\" cy=\"" + Y(d.p.y) + "\" r=\"2\" fill-opacity=\"" + fmt(d.weight) + "\"/>\n";
  s += "</g>\n<g id=\"gt\" fill=\"none\" stroke=\"#999999\" stroke-width=\"4\">\n";
  for (const auto& w : fig.gt_walls) line(w, "gt-wall");
  for (const auto& b : fig.gt_boxes) rect(b, "gt-box");
  s += "</g>\n<g id=\"trajectory\" fill=\"none\" stroke=\"#1b9e77\" stroke-width=\"1.5\">\n";
  if (!fig.trajectory.empty()) {
    s += "<polyline points=\"";
    for (std::size_t i = 0; i < fig.trajectory.size(); ++i)
      s += (i ? " " : "") + X(fig.trajectory[i].x) + "," + Y(fig.trajectory[i].y);
    s += "\"/>\n";
  }
  s += "</g>\n<g id=\"cloud\" fill=\"#7570b3\" stroke=\"none\">\n";
  for (auto p : fig.cloud) s += "<circle cx=\"" + X(p.x) + "\" cy=\"" + Y(p.y) + "\" r=\"1.5\"/>\n";
  s += "</g>\n<g id=\"layout\" fill=\"none\" stroke=\"#e7298a\" stroke-width=\"2\">\n";
  for (const auto& w : fig.walls) line(w, "wall");
  for (const auto& b : fig.boxes) rect(b, "box");
  s += "</g>\n<g id=\"radar\" fill=\"black\">\n";
  for (auto p : fig.radars)
    s += "<rect x=\"" + fmt((p.x - x0) * ppm - 4) + "\" y=\"" + fmt((y1 - p.y) * ppm - 4) +
         "\" width=\"8\" height=\"8\"/>\n";
  s += "</g>\n</svg>\n";
  return s;
}

}  // namespace ghostscope::plot
