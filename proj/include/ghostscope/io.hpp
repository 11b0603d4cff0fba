#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ghostscope/bame.hpp"
#include "ghostscope/geom.hpp"
#include "ghostscope/ghostid.hpp"
#include "ghostscope/inversion.hpp"
#include "ghostscope/layoutfit.hpp"
#include "ghostscope/refine.hpp"
#include "ghostscope/rfsim.hpp"
#include "ghostscope/simgen.hpp"

namespace ghostscope::io {

namespace fs = std::filesystem;

inline constexpr const char* kSceneSchema = "ghostscope-scene-v1";
inline constexpr const char* kLayoutSchema = "ghostscope-layout-v1";

std::string read_text(const fs::path& path);
/// Writes through a temporary file and renames, so readers never see partial output.
void write_text(const fs::path& path, const std::string& text);

/// Scene JSON. Points are [x, y] arrays. Either "human_path" (explicit points)
/// or "trajectory" (an ellipse generator) must be present.
Scene parse_scene(const std::string& json_text);
Scene load_scene(const fs::path& path);
std::string scene_to_json(const Scene& scene);

struct LayoutFile {
  std::vector<Segment2> walls;
  std::vector<double> rms;
  std::vector<Box2> objects;
};
LayoutFile parse_layout(const std::string& json_text);
LayoutFile load_layout(const fs::path& path);
std::string layout_to_json(const LayoutHypothesis& hyp);

/// GSC1: "GSC1", u32 n_tx, u32 n_rx, u32 n_samples, f64 lambda, f64 d_tx,
/// f64 d_rx, f64 range_res, then interleaved f32 (re, im). Little-endian.
void write_cube(const fs::path& path, const RadarCube& cube);
RadarCube read_cube(const fs::path& path, std::size_t frame_id = 0);
/// Power maps in the same container: dims (n_range, n_aoa, n_aod) replace
/// (n_tx, n_rx, n_samples); lambda carries the grid start, d_tx the grid step,
/// d_rx is zero; samples are (value, 0).
void write_map(const fs::path& path, const RangeAngleMap& map);
void write_map(const fs::path& path, const BiAngularCube& cube);

std::string ghosts_csv_header();
std::string ghost_rows(const GhostSet& gs);
std::string oracle_csv(const Scene& scene, const RadarConfig& cfg, std::size_t n_frames);
std::string cloud_csv(const ReflectorCloud& cloud);
std::string map_csv(const RangeAngleMap& map, double min_relative = 0.0);
std::string refine_log_csv(const std::vector<RefineLogEntry>& log);

struct CloudRow {
  std::size_t frame_id = 0;
  int order = 1;
  Point2 c1, sp;
  double sc1 = 0.0;
};
std::vector<CloudRow> parse_cloud_csv(const std::string& text);

void write_pgm(const fs::path& path, const Raster& r);
Raster read_pgm(const fs::path& path);

}  // namespace ghostscope::io
