#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ghostscope/geom.hpp"

namespace ghostscope {

struct FloorPlan {
  std::vector<Point2> outline;  // closed polygon, last vertex connects to the first
  std::vector<Segment2> inner_walls;

  std::vector<Segment2> outline_edges() const;
  /// Outline edges followed by inner walls.
  std::vector<Segment2> all_walls() const;
};

struct PartialObservation {
  std::vector<Point2> visible_points;
  Point2 radar;
  double heading_deg = 0.0;
};

/// Closed azimuth arc [lo, hi] in degrees, relative to the heading. An arc
/// with lo > hi wraps through 360; hi - lo >= 360 covers everything.
using AzimuthArc = std::pair<double, double>;

struct AugmentConfig {
  std::vector<AzimuthArc> del_intervals;
  std::vector<AzimuthArc> rot_intervals;
  double alpha_deg = 0.0;
  double scale = 1.0;
};

struct PlanGenConfig {
  double min_side = 3.0, max_side = 6.0;
  int max_inner_walls = 3;
  int max_boxes = 4;
  double box_min = 0.4, box_max = 1.2;
};

struct DatasetConfig {
  std::size_t poses_per_plan = 3;
  std::size_t n_rays = 720;
  double resolution = 0.02;  // meters per pixel
  double canvas = 10.0;      // meters, square, centered on the radar
  double alpha_max_deg = 10.0;
  double scale_min = 0.9, scale_max = 1.1;
  int min_arcs = 1, max_arcs = 2;
  double arc_min_deg = 20.0, arc_max_deg = 60.0;
  int jobs = 0;  // 0 = OpenMP default
};

/// One generated plan with its objects, ready for raycasting.
struct GeneratedPlan {
  FloorPlan plan;
  std::vector<SceneObject> objects;
};

struct ManifestRow {
  std::size_t sample = 0;
  std::size_t plan = 0;
  std::size_t pose = 0;
  std::uint64_t seed = 0;
  Point2 radar;
  double heading_deg = 0.0;
  AugmentConfig augment;
  std::size_t n_visible = 0;
  std::string wall_pgm, object_pgm, obs_pgm, obs_clean_pgm, meta_json;
};

/// 8-bit raster, row 0 at the top (max y).
struct Raster {
  std::size_t width = 0, height = 0;
  double resolution = 0.02;
  Point2 origin;  // world coordinate of the top-left corner
  std::vector<unsigned char> pixels;

  bool to_pixel(Point2 p, std::size_t& col, std::size_t& row) const;
  void set(Point2 p, unsigned char v = 255);
  unsigned char at(std::size_t col, std::size_t row) const { return pixels[row * width + col]; }
};

namespace simgen {

bool point_in_polygon(Point2 p, const std::vector<Point2>& poly);

/// First hit per ray over outline edges, inner walls and each object's
/// reflective segment (other box faces are transparent). Rays are spaced
/// 360/n_rays apart starting at the heading.
PartialObservation raycast(const FloorPlan& plan, const std::vector<SceneObject>& objects, Point2 radar,
                           std::size_t n_rays, double heading_deg = 0.0);

/// Azimuth of p about the radar relative to the heading, in [0, 360).
double azimuth(const PartialObservation& obs, Point2 p);
bool in_arcs(double az, const std::vector<AzimuthArc>& arcs);

PartialObservation augment_missing(const PartialObservation& obs, const std::vector<AzimuthArc>& del);
PartialObservation augment_rotate(const PartialObservation& obs, const std::vector<AzimuthArc>& arcs,
                                  double alpha_deg, Point2 center);
PartialObservation augment_scale(const PartialObservation& obs, double a);
/// missing o rotate o scale: scale first, then rotate about the radar, then delete.
PartialObservation augment(const PartialObservation& obs, const AugmentConfig& cfg);

GeneratedPlan generate_plan(std::uint64_t seed, const PlanGenConfig& cfg = {});

Raster make_canvas(Point2 center, double size, double resolution);
void draw_segment(Raster& r, const Segment2& s);
void fill_box(Raster& r, const Box2& b);

/// Writes rasters, metadata and manifest.csv into out_dir; returns the rows.
std::vector<ManifestRow> gen_dataset(const std::vector<GeneratedPlan>& plans, const DatasetConfig& cfg,
                                     std::uint64_t seed, const std::filesystem::path& out_dir);

}  // namespace simgen
}  // namespace ghostscope
