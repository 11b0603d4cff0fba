#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ghostscope/bame.hpp"
#include "ghostscope/ghostid.hpp"
#include "ghostscope/inversion.hpp"
#include "ghostscope/layoutfit.hpp"
#include "ghostscope/metrics.hpp"
#include "ghostscope/refine.hpp"
#include "ghostscope/rfsim.hpp"
#include "ghostscope/simgen.hpp"

namespace ghostscope::cli {

namespace fs = std::filesystem;

struct PipelineConfig {
  std::uint64_t seed = 1;
  RadarConfig radar;
  std::optional<double> snr_db;  // overrides radar.noise_sigma when set
  AngleGrid grid;
  CfarConfig cfar;
  IdConfig id;
  InversionConfig inversion;
  LayoutConfig fit;
  RefineConfig refine;
  bool refine_enabled = true;
  bool use_bame = true;
  double reintegrate_tol_deg = 15.0;
  double traj_fraction = 1.0;
  int jobs = 1;  // frames processed concurrently; kernels are threaded either way
  double metric_spacing = 0.02;
  double f1_tol = 0.15;
  double iou_resolution = 0.02;

  PipelineConfig();
  /// Resolves derived values (noise from snr_db, inversion range) and checks every field.
  void finalize();
};

/// Parses a config JSON document. Unknown keys and wrong types are errors.
PipelineConfig parse_config(const std::string& json_text);
PipelineConfig load_config(const std::optional<fs::path>& path);
std::string config_to_json(const PipelineConfig& cfg);

/// Master seed after the GHOSTSCOPE_SEED override.
std::uint64_t effective_seed(std::uint64_t config_seed);

struct FrameOutput {
  std::size_t frame_id = 0;
  std::vector<Detection> detections;  // map space, after reintegration
  std::vector<GhostSet> ghosts;
  std::vector<ReflectorEstimate> estimates;
  std::optional<Point2> human;
};

/// One frame through the BAME (or virtual-array) detection chain, ghost
/// identification and inversion.
FrameOutput process_frame(const RadarCube& cube, Point2 radar, const PipelineConfig& cfg, InversionStats* stats);

/// Walls of the scene restricted to the stretches actually excited by
/// first-order bounces along the first `n_frames` trajectory points.
std::vector<Segment2> covered_walls(const Scene& scene, std::size_t n_frames);

struct PipelineResult {
  std::size_t n_frames = 0;
  std::size_t n_detections = 0;
  std::size_t n_ghost_sets = 0;
  InversionStats inversion;
  ReflectorCloud cloud;
  LayoutHypothesis initial;
  RefineResult refined;
  std::vector<FrameOutput> frames;
  std::optional<LayoutMetrics> layout_metrics;  // absent when nothing could be compared
  std::optional<ObjectMetrics> object_metrics;
  std::vector<Segment2> gt_walls;
  std::vector<std::string> warnings;
};

/// Simulate-and-process over a scene (no files).
PipelineResult run_pipeline_scene(const Scene& scene, const PipelineConfig& cfg);
/// Process pre-recorded cubes; the scene, if given, supplies radar pose and ground truth.
PipelineResult run_pipeline_cubes(const std::vector<fs::path>& cubes, const std::optional<Scene>& scene,
                                  const PipelineConfig& cfg);

// Subcommand bodies. Each returns normally or throws DataError /
// DegenerateGeometry / UsageError.
std::size_t run_simulate(const fs::path& scene_path, const fs::path& out_dir, const PipelineConfig& cfg);
PipelineResult run_pipeline(const fs::path& input, const std::optional<fs::path>& scene_path, const fs::path& out_dir,
                            const PipelineConfig& cfg);
void run_evaluate(const fs::path& pred, const fs::path& gt, const fs::path& out_csv, bool covered_only,
                  const PipelineConfig& cfg);
void run_plot(const std::vector<fs::path>& inputs, const fs::path& out_svg);
std::size_t run_gen_dataset(const fs::path& out_dir, std::size_t n_plans, const DatasetConfig& dcfg,
                            std::uint64_t seed);

}  // namespace ghostscope::cli
