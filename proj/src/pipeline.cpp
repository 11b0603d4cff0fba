#include "ghostscope/pipeline.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include <omp.h>

#include "json.hpp"

#include "ghostscope/error.hpp"
#include "ghostscope/io.hpp"
#include "ghostscope/plot.hpp"
#include "ghostscope/seed.hpp"

namespace ghostscope::cli {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

PipelineConfig::PipelineConfig() {
  // Full-cube CFAR sees ~6e6 cells per frame, so the module default Pfa would
  // flood identification with false alarms. Training runs along range only:
  // near endfire the angular mainlobe is tens of degrees wide and an angular
  // training ring would sit inside the target's own beam.
  cfar.guard_range = 2;
  cfar.train_range = 8;
  cfar.guard_angle_deg = 2.0;
  cfar.train_angle_deg = 0.0;
  cfar.pfa = 1e-6;
  cfar.min_relative_power = 0.18;
  // G2' sits 12 dB under H and its pick in identification is loose; its
  // estimates scatter and drag RANSAC off the walls.
  fit.order_filter = 1;
}

void PipelineConfig::finalize() {
  if (snr_db) {
    if (!std::isfinite(*snr_db)) throw DataError("radar.snr_db must be finite");
    radar.noise_sigma = noise_sigma_for_snr(radar, *snr_db);
  }
  validate(radar);
  if (!(grid.step_deg > 0.0) || grid.count < 2) throw DataError("angle_grid needs step_deg > 0 and count >= 2");
  if (grid.start_deg < 0.0 || grid.angle(grid.count - 1) >= 180.0 + 1e-9)
    throw DataError("angle_grid must lie within [0, 180)");
  if (!(cfar.pfa > 0.0 && cfar.pfa < 1.0)) throw DataError("cfar.pfa must lie in (0, 1)");
  if (cfar.train_range <= cfar.guard_range && cfar.train_angle_deg <= cfar.guard_angle_deg)
    throw DataError("cfar training window must extend beyond the guard window");
  if (cfar.guard_angle_deg < 0.0 || cfar.train_angle_deg < 0.0 || cfar.merge_angle_deg < 0.0)
    throw DataError("cfar angles must be >= 0");
  if (cfar.min_relative_power < 0.0 || cfar.min_relative_power >= 1.0)
    throw DataError("cfar.min_relative_power must lie in [0, 1)");
  validate(id);
  if (!(inversion.epsilon > 0.0)) throw DataError("inversion.epsilon must be > 0");
  if (!(inversion.max_range > 0.0)) throw DataError("inversion.max_range must be > 0");
  if (fit.gmm.k_max < 1) throw DataError("fit.k_max must be >= 1");
  if (fit.gmm.max_iters < 1) throw DataError("fit.gmm_max_iters must be >= 1");
  if (!(fit.gmm.tol > 0.0)) throw DataError("fit.gmm_tol must be > 0");
  if (!(fit.gmm.cov_floor > 0.0)) throw DataError("fit.cov_floor must be > 0");
  if (fit.gmm.n_init < 1) throw DataError("fit.n_init must be >= 1");
  if (!(fit.ransac.threshold > 0.0)) throw DataError("fit.ransac_threshold must be > 0");
  if (fit.ransac.iters < 1) throw DataError("fit.ransac_iters must be >= 1");
  if (fit.ransac.min_inliers < 2) throw DataError("fit.min_inliers must be >= 2");
  if (!(fit.min_wall_length >= 0.0)) throw DataError("fit.min_wall_length must be >= 0");
  if (!(fit.box_sigma > 0.0)) throw DataError("fit.box_sigma must be > 0");
  if (fit.order_filter < 0 || fit.order_filter > 2) throw DataError("fit.order_filter must be 0, 1 or 2");
  validate(refine);
  if (!(reintegrate_tol_deg >= 0.0)) throw DataError("pipeline.reintegrate_tol_deg must be >= 0");
  if (!(traj_fraction > 0.0 && traj_fraction <= 1.0)) throw DataError("pipeline.traj_fraction must lie in (0, 1]");
  if (jobs < 1) throw DataError("pipeline.jobs must be >= 1");
  if (!(metric_spacing > 0.0)) throw DataError("pipeline.metric_spacing must be > 0");
  if (!(f1_tol > 0.0)) throw DataError("pipeline.f1_tol must be > 0");
  if (!(iou_resolution > 0.0)) throw DataError("pipeline.iou_resolution must be > 0");
}

namespace {

// Reads one JSON object section, rejecting unknown keys and wrong types.
class Section {
 public:
  Section(const json& root, const std::string& name) : path_(name) {
    if (root.contains(name)) {
      obj_ = &root.at(name);
      if (!obj_->is_object()) throw DataError("config." + name + " must be an object");
    }
  }
  void num(const char* key, double& out) {
    if (const json* v = get(key)) {
      if (!v->is_number()) fail(key, "must be a number");
      out = v->get<double>();
      if (!std::isfinite(out)) fail(key, "must be finite");
    }
  }
  template <class U>
  void uint(const char* key, U& out) {
    if (const json* v = get(key)) {
      if (!v->is_number_unsigned()) fail(key, "must be a non-negative integer");
      out = static_cast<U>(v->get<std::uint64_t>());
    }
  }
  void integer(const char* key, int& out) {
    if (const json* v = get(key)) {
      if (!v->is_number_integer()) fail(key, "must be an integer");
      out = v->get<int>();
    }
  }
  void boolean(const char* key, bool& out) {
    if (const json* v = get(key)) {
      if (!v->is_boolean()) fail(key, "must be true or false");
      out = v->get<bool>();
    }
  }
  void opt_num(const char* key, std::optional<double>& out) {
    if (const json* v = get(key)) {
      if (v->is_null()) {
        out.reset();
        return;
      }
      double d = 0.0;
      num(key, d);
      out = d;
    }
  }
  void finish() const {
    if (!obj_) return;
    for (auto it = obj_->begin(); it != obj_->end(); ++it)
      if (!seen_.count(it.key())) throw DataError("config." + path_ + "." + it.key() + " is not a recognised field");
  }

 private:
  const json* get(const char* key) {
    seen_.insert(key);
    if (!obj_ || !obj_->contains(key)) return nullptr;
    return &obj_->at(key);
  }
  [[noreturn]] void fail(const char* key, const char* what) const {
    throw DataError("config." + path_ + "." + key + " " + what);
  }

  std::string path_;
  const json* obj_ = nullptr;
  std::set<std::string> seen_;
};

}  // namespace

PipelineConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError("config must be a JSON object");
  static const std::set<std::string> top = {"seed", "radar", "angle_grid", "cfar", "id", "inversion",
                                            "fit", "refine", "pipeline"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!top.count(it.key())) throw DataError("config." + it.key() + " is not a recognised field");

  PipelineConfig c;
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw DataError("config.seed must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }

  Section r(j, "radar");
  r.num("wavelength", c.radar.wavelength);
  r.uint("n_tx", c.radar.n_tx);
  r.uint("n_rx", c.radar.n_rx);
  r.num("d_tx", c.radar.d_tx);
  r.num("d_rx", c.radar.d_rx);
  r.uint("n_samples", c.radar.n_samples);
  r.num("range_resolution", c.radar.range_resolution);
  r.num("noise_sigma", c.radar.noise_sigma);
  r.opt_num("snr_db", c.snr_db);
  r.num("bounce_attenuation", c.radar.bounce_attenuation);
  r.finish();

  Section g(j, "angle_grid");
  g.num("start_deg", c.grid.start_deg);
  g.num("step_deg", c.grid.step_deg);
  g.uint("count", c.grid.count);
  g.finish();

  Section f(j, "cfar");
  f.uint("guard_range", c.cfar.guard_range);
  f.num("guard_angle_deg", c.cfar.guard_angle_deg);
  f.uint("train_range", c.cfar.train_range);
  f.num("train_angle_deg", c.cfar.train_angle_deg);
  f.num("pfa", c.cfar.pfa);
  f.num("merge_angle_deg", c.cfar.merge_angle_deg);
  f.uint("merge_range", c.cfar.merge_range);
  f.num("min_relative_power", c.cfar.min_relative_power);
  f.finish();

  Section i(j, "id");
  i.num("tau", c.id.tau);
  i.num("delta_r", c.id.delta_r);
  i.num("delta_theta", c.id.delta_theta);
  i.num("delta_g1", c.id.delta_g1);
  i.finish();

  Section v(j, "inversion");
  v.num("epsilon", c.inversion.epsilon);
  v.num("max_range", c.inversion.max_range);
  v.finish();

  Section l(j, "fit");
  l.uint("k_max", c.fit.gmm.k_max);
  l.uint("gmm_max_iters", c.fit.gmm.max_iters);
  l.num("gmm_tol", c.fit.gmm.tol);
  l.num("cov_floor", c.fit.gmm.cov_floor);
  l.uint("n_init", c.fit.gmm.n_init);
  l.num("ransac_threshold", c.fit.ransac.threshold);
  l.uint("ransac_iters", c.fit.ransac.iters);
  l.uint("min_inliers", c.fit.ransac.min_inliers);
  l.num("min_wall_length", c.fit.min_wall_length);
  l.num("box_sigma", c.fit.box_sigma);
  l.num("merge_angle_deg", c.fit.merge_angle_deg);
  l.num("merge_offset", c.fit.merge_offset);
  l.num("merge_gap", c.fit.merge_gap);
  l.integer("order_filter", c.fit.order_filter);
  l.finish();

  Section e(j, "refine");
  e.boolean("enabled", c.refine_enabled);
  e.num("wall_halfwidth", c.refine.wall_halfwidth);
  e.uint("max_iters", c.refine.max_iters);
  e.num("step", c.refine.step);
  e.finish();

  Section p(j, "pipeline");
  p.boolean("use_bame", c.use_bame);
  p.num("reintegrate_tol_deg", c.reintegrate_tol_deg);
  p.num("traj_fraction", c.traj_fraction);
  p.integer("jobs", c.jobs);
  p.num("metric_spacing", c.metric_spacing);
  p.num("f1_tol", c.f1_tol);
  p.num("iou_resolution", c.iou_resolution);
  p.finish();

  c.finalize();
  return c;
}

PipelineConfig load_config(const std::optional<fs::path>& path) {
  if (!path) {
    PipelineConfig c;
    c.finalize();
    return c;
  }
  return parse_config(io::read_text(*path));
}

std::string config_to_json(const PipelineConfig& c) {
  ojson j;
  j["seed"] = c.seed;
  j["radar"] = {{"wavelength", c.radar.wavelength},
                {"n_tx", c.radar.n_tx},
                {"n_rx", c.radar.n_rx},
                {"d_tx", c.radar.d_tx},
                {"d_rx", c.radar.d_rx},
                {"n_samples", c.radar.n_samples},
                {"range_resolution", c.radar.range_resolution},
                {"noise_sigma", c.radar.noise_sigma},
                {"snr_db", c.snr_db ? ojson(*c.snr_db) : ojson(nullptr)},
                {"bounce_attenuation", c.radar.bounce_attenuation}};
  j["angle_grid"] = {{"start_deg", c.grid.start_deg}, {"step_deg", c.grid.step_deg}, {"count", c.grid.count}};
  j["cfar"] = {{"guard_range", c.cfar.guard_range},
               {"guard_angle_deg", c.cfar.guard_angle_deg},
               {"train_range", c.cfar.train_range},
               {"train_angle_deg", c.cfar.train_angle_deg},
               {"pfa", c.cfar.pfa},
               {"merge_angle_deg", c.cfar.merge_angle_deg},
               {"merge_range", c.cfar.merge_range},
               {"min_relative_power", c.cfar.min_relative_power}};
  j["id"] = {{"tau", c.id.tau}, {"delta_r", c.id.delta_r}, {"delta_theta", c.id.delta_theta}, {"delta_g1", c.id.delta_g1}};
  j["inversion"] = {{"epsilon", c.inversion.epsilon}, {"max_range", c.inversion.max_range}};
  j["fit"] = {{"k_max", c.fit.gmm.k_max},
              {"gmm_max_iters", c.fit.gmm.max_iters},
              {"gmm_tol", c.fit.gmm.tol},
              {"cov_floor", c.fit.gmm.cov_floor},
              {"n_init", c.fit.gmm.n_init},
              {"ransac_threshold", c.fit.ransac.threshold},
              {"ransac_iters", c.fit.ransac.iters},
              {"min_inliers", c.fit.ransac.min_inliers},
              {"min_wall_length", c.fit.min_wall_length},
              {"box_sigma", c.fit.box_sigma},
              {"merge_angle_deg", c.fit.merge_angle_deg},
              {"merge_offset", c.fit.merge_offset},
              {"merge_gap", c.fit.merge_gap},
              {"order_filter", c.fit.order_filter}};
  j["refine"] = {{"enabled", c.refine_enabled},
                 {"wall_halfwidth", c.refine.wall_halfwidth},
                 {"max_iters", c.refine.max_iters},
                 {"step", c.refine.step}};
  j["pipeline"] = {{"use_bame", c.use_bame},
                   {"reintegrate_tol_deg", c.reintegrate_tol_deg},
                   {"traj_fraction", c.traj_fraction},
                   {"jobs", c.jobs},
                   {"metric_spacing", c.metric_spacing},
                   {"f1_tol", c.f1_tol},
                   {"iou_resolution", c.iou_resolution}};
  return j.dump(2) + "\n";
}

std::uint64_t effective_seed(std::uint64_t config_seed) {
  const char* env = std::getenv("GHOSTSCOPE_SEED");
  if (!env || !*env) return config_seed;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (errno != 0 || *end != '\0' || env[0] == '-')
    throw DataError(std::string("GHOSTSCOPE_SEED is not a non-negative integer: ") + env);
  return v;
}

FrameOutput process_frame(const RadarCube& cube, Point2 radar, const PipelineConfig& cfg, InversionStats* stats) {
  FrameOutput out;
  out.frame_id = cube.frame_id;
  const RangeSpectrum spec = bame::range_fft(cube);
  if (cfg.use_bame) {
    const BiAngularCube bc = bame::bi_angular_cube(spec, cfg.grid);
    out.detections = bame::reintegrate(bame::cfar_3d(bc, cfg.cfar), cfg.reintegrate_tol_deg);
  } else {
    out.detections = bame::cfar_2d(bame::virtual_array_map(spec, cfg.grid), cfg.cfar);
  }
  if (out.detections.empty()) return out;
  out.ghosts = ghostid::identify_all(out.detections, cfg.id, cube.frame_id);
  if (out.ghosts.empty()) return out;
  out.human = from_polar(radar, out.ghosts.front().h.polar);
  for (const auto& gs : out.ghosts) {
    auto est = inversion::estimate_reflector(gs, radar, cfg.inversion, stats);
    out.estimates.insert(out.estimates.end(), est.begin(), est.end());
  }
  return out;
}

std::vector<Segment2> covered_walls(const Scene& scene, std::size_t n_frames) {
  const std::size_t n_walls = scene.walls.size();
  std::vector<double> lo(n_walls, std::numeric_limits<double>::infinity());
  std::vector<double> hi(n_walls, -std::numeric_limits<double>::infinity());
  n_frames = std::min(n_frames, scene.human_path.size());
  for (std::size_t f = 0; f < n_frames; ++f)
    for (const auto& g : geom::ghost_oracle(scene, f)) {
      if (g.label != geom::GhostLabel::G1 || g.reflector < 0) continue;
      const auto w = static_cast<std::size_t>(g.reflector);
      if (w >= n_walls) continue;  // object faces are scored as boxes
      const Segment2& s = scene.walls[w];
      const double t = dot(g.bounce_point - s.a, s.direction());
      lo[w] = std::min(lo[w], t);
      hi[w] = std::max(hi[w], t);
    }
  std::vector<Segment2> out;
  for (std::size_t w = 0; w < n_walls; ++w) {
    if (!(hi[w] > lo[w])) continue;
    const Segment2& s = scene.walls[w];
    out.push_back({s.a + lo[w] * s.direction(), s.a + hi[w] * s.direction()});
  }
  return out;
}

namespace {

std::size_t truncated_frames(std::size_t total, double fraction) {
  const auto n = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(total) - 1e-9));
  return std::clamp<std::size_t>(n, total ? 1 : 0, total);
}

template <class MakeCube>
PipelineResult run_frames(std::size_t n_frames, Point2 radar, const PipelineConfig& cfg, MakeCube make_cube) {
  PipelineResult res;
  res.n_frames = n_frames;
  res.frames.resize(n_frames);
  std::vector<InversionStats> stats(n_frames);
  std::exception_ptr err;

#pragma omp parallel for schedule(dynamic) num_threads(cfg.jobs) if (cfg.jobs > 1)
  for (std::size_t f = 0; f < n_frames; ++f) {
    try {
      res.frames[f] = process_frame(make_cube(f), radar, cfg, &stats[f]);
    } catch (...) {
#pragma omp critical(pipeline_err)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);

  std::vector<std::vector<ReflectorEstimate>> per_frame;
  std::vector<Point2> traj;
  for (std::size_t f = 0; f < n_frames; ++f) {
    const auto& fo = res.frames[f];
    res.n_detections += fo.detections.size();
    res.n_ghost_sets += fo.ghosts.size();
    res.inversion.accepted += stats[f].accepted;
    res.inversion.discarded_range += stats[f].discarded_range;
    res.inversion.discarded_degenerate += stats[f].discarded_degenerate;
    per_frame.push_back(fo.estimates);
    if (fo.human) traj.push_back(*fo.human);
  }
  res.cloud = inversion::accumulate(per_frame, std::move(traj));
  if (res.n_detections == 0) res.warnings.push_back("no detections in any frame");
  return res;
}

void fit_and_refine(PipelineResult& res, const PipelineConfig& cfg, std::uint64_t seed) {
  if (res.cloud.points.empty()) {
    res.warnings.push_back("empty reflector cloud; layout is empty");
  } else {
    res.initial = layoutfit::fit_layout(res.cloud, cfg.fit, derive_seed(seed, 0x6c61796f7574ULL));
  }
  res.initial.source = &res.cloud;
  if (cfg.refine_enabled) {
    res.refined = refine::refine_layout(res.initial, res.cloud.trajectory, cfg.refine);
  } else {
    res.refined.layout = res.initial;
    res.refined.initial = res.refined.final_loss =
        refine::overlap_loss(res.cloud.trajectory, res.initial, cfg.refine.wall_halfwidth);
    res.refined.converged = res.refined.final_loss.total == 0;
  }
  res.refined.layout.source = &res.cloud;
}

void score(PipelineResult& res, const Scene& scene, const PipelineConfig& cfg) {
  res.gt_walls = covered_walls(scene, res.n_frames);
  std::vector<Segment2> pred;
  for (const auto& w : res.refined.layout.walls) pred.push_back(w.segment);
  if (pred.empty())
    res.warnings.push_back("no walls predicted; wall metrics zeroed");
  else if (res.gt_walls.empty())
    res.warnings.push_back("no multipath-covered walls in the scene; wall metrics zeroed");
  else
    res.layout_metrics = metrics::f1_at_tolerance(pred, res.gt_walls, cfg.f1_tol, cfg.metric_spacing);
  std::vector<Box2> gt_boxes;
  for (const auto& o : scene.objects) gt_boxes.push_back(o.box);
  res.object_metrics = metrics::iou_dice(res.refined.layout.objects, gt_boxes, cfg.iou_resolution);
}

// Points into the cloud must survive moves of the result object.
void relink(PipelineResult& res) {
  res.initial.source = &res.cloud;
  res.refined.layout.source = &res.cloud;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

const char* kChamferHeader =
    "# chamfer: 0.5 * (mean pred->gt + mean gt->pred nearest-neighbour distance) over wall samples";

struct ReportRow {
  std::string name;
  LayoutMetrics lm;
  ObjectMetrics om;
};

std::string report_csv(const std::vector<ReportRow>& rows, const PipelineConfig& cfg) {
  std::ostringstream os;
  os << kChamferHeader << ", spacing " << fmt(cfg.metric_spacing) << " m, f1 tolerance " << fmt(cfg.f1_tol)
     << " m, iou resolution " << fmt(cfg.iou_resolution) << " m\n";
  os << "scene,chamfer_cm,f1,precision,recall,iou,dice\n";
  ReportRow agg{"aggregate", {}, {}};
  for (const auto& r : rows) {
    os << r.name << ',' << fmt(100.0 * r.lm.chamfer) << ',' << fmt(r.lm.f1) << ',' << fmt(r.lm.precision) << ','
       << fmt(r.lm.recall) << ',' << fmt(r.om.iou) << ',' << fmt(r.om.dice) << '\n';
    agg.lm.chamfer += r.lm.chamfer;
    agg.lm.f1 += r.lm.f1;
    agg.lm.precision += r.lm.precision;
    agg.lm.recall += r.lm.recall;
    agg.om.iou += r.om.iou;
    agg.om.dice += r.om.dice;
  }
  const double n = rows.empty() ? 1.0 : static_cast<double>(rows.size());
  os << "aggregate," << fmt(100.0 * agg.lm.chamfer / n) << ',' << fmt(agg.lm.f1 / n) << ','
     << fmt(agg.lm.precision / n) << ',' << fmt(agg.lm.recall / n) << ',' << fmt(agg.om.iou / n) << ','
     << fmt(agg.om.dice / n) << '\n';
  return os.str();
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DataError("cannot create output directory " + dir.string());
}

std::vector<fs::path> list_files(const fs::path& dir, const std::string& ext) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

PipelineResult run_pipeline_scene(const Scene& scene, const PipelineConfig& cfg) {
  validate(scene);
  const std::uint64_t seed = effective_seed(cfg.seed);
  const std::size_t n = truncated_frames(scene.human_path.size(), cfg.traj_fraction);
  PipelineResult res = run_frames(n, scene.radar, cfg, [&](std::size_t f) {
    return rfsim::simulate_frame(scene, f, cfg.radar, rfsim::frame_seed(seed, f));
  });
  relink(res);
  fit_and_refine(res, cfg, seed);
  score(res, scene, cfg);
  return res;
}

PipelineResult run_pipeline_cubes(const std::vector<fs::path>& cubes, const std::optional<Scene>& scene,
                                  const PipelineConfig& cfg) {
  if (cubes.empty()) throw DataError("pipeline: no cube files");
  if (scene) validate(*scene);
  const std::uint64_t seed = effective_seed(cfg.seed);
  const std::size_t n = truncated_frames(cubes.size(), cfg.traj_fraction);
  const Point2 radar = scene ? scene->radar : Point2{};
  PipelineResult res = run_frames(n, radar, cfg, [&](std::size_t f) { return io::read_cube(cubes[f], f); });
  relink(res);
  fit_and_refine(res, cfg, seed);
  if (scene)
    score(res, *scene, cfg);
  else
    res.warnings.push_back("no scene given; metrics skipped");
  return res;
}

std::size_t run_simulate(const fs::path& scene_path, const fs::path& out_dir, const PipelineConfig& cfg) {
  const Scene scene = io::load_scene(scene_path);
  validate(scene);
  const std::uint64_t seed = effective_seed(cfg.seed);
  const std::size_t n = truncated_frames(scene.human_path.size(), cfg.traj_fraction);
  ensure_dir(out_dir);
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic) num_threads(cfg.jobs) if (cfg.jobs > 1)
  for (std::size_t f = 0; f < n; ++f) {
    try {
      char name[32];
      std::snprintf(name, sizeof name, "cube_%05zu.gsc", f);
      io::write_cube(out_dir / name, rfsim::simulate_frame(scene, f, cfg.radar, rfsim::frame_seed(seed, f)));
    } catch (...) {
#pragma omp critical(simulate_err)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  io::write_text(out_dir / "oracle.csv", io::oracle_csv(scene, cfg.radar, n));
  return n;
}

PipelineResult run_pipeline(const fs::path& input, const std::optional<fs::path>& scene_path, const fs::path& out_dir,
                            const PipelineConfig& cfg) {
  if (!fs::exists(input)) throw DataError("pipeline: input not found: " + input.string());
  PipelineResult res;
  std::string name;
  if (fs::is_directory(input)) {
    std::optional<Scene> scene;
    if (scene_path) scene = io::load_scene(*scene_path);
    res = run_pipeline_cubes(list_files(input, ".gsc"), scene, cfg);
    name = scene_path ? scene_path->stem().string() : input.filename().string();
  } else {
    res = run_pipeline_scene(io::load_scene(input), cfg);
    name = input.stem().string();
  }
  relink(res);

  ensure_dir(out_dir);
  io::write_text(out_dir / "layout.json", io::layout_to_json(res.refined.layout));
  io::write_text(out_dir / "layout_initial.json", io::layout_to_json(res.initial));
  std::string ghosts = io::ghosts_csv_header();
  for (const auto& fo : res.frames)
    for (const auto& gs : fo.ghosts) ghosts += io::ghost_rows(gs);
  io::write_text(out_dir / "ghosts.csv", ghosts);
  io::write_text(out_dir / "cloud.csv", io::cloud_csv(res.cloud));
  io::write_text(out_dir / "refine_log.csv", io::refine_log_csv(res.refined.log));
  io::write_text(out_dir / "report.csv",
                 report_csv({{name, res.layout_metrics.value_or(LayoutMetrics{}),
                              res.object_metrics.value_or(ObjectMetrics{})}},
                            cfg));

  ojson s;
  s["frames"] = res.n_frames;
  s["detections"] = res.n_detections;
  s["ghost_sets"] = res.n_ghost_sets;
  s["reflector_points"] = res.cloud.points.size();
  s["inversion"] = {{"accepted", res.inversion.accepted},
                    {"discarded_range", res.inversion.discarded_range},
                    {"discarded_degenerate", res.inversion.discarded_degenerate}};
  s["walls"] = res.refined.layout.walls.size();
  s["objects"] = res.refined.layout.objects.size();
  s["overlap_initial"] = res.refined.initial.total;
  s["overlap_final"] = res.refined.final_loss.total;
  s["refine_converged"] = res.refined.converged;
  s["use_bame"] = cfg.use_bame;
  s["warnings"] = res.warnings;
  io::write_text(out_dir / "summary.json", s.dump(2) + "\n");
  return res;
}

void run_evaluate(const fs::path& pred, const fs::path& gt, const fs::path& out_csv, bool covered_only,
                  const PipelineConfig& cfg) {
  std::vector<std::pair<fs::path, fs::path>> pairs;
  if (fs::is_directory(pred)) {
    if (!fs::is_directory(gt)) throw DataError("evaluate: --pred is a directory, so --gt must be one too");
    for (const auto& p : list_files(pred, ".json")) {
      const fs::path g = gt / p.filename();
      if (!fs::exists(g)) throw DataError("evaluate: no ground truth for " + p.filename().string());
      pairs.emplace_back(p, g);
    }
    if (pairs.empty()) throw DataError("evaluate: no layout files in " + pred.string());
  } else {
    pairs.emplace_back(pred, gt);
  }

  std::vector<ReportRow> rows;
  for (const auto& [p, g] : pairs) {
    const io::LayoutFile layout = io::load_layout(p);
    const Scene scene = io::load_scene(g);
    const std::vector<Segment2> gt_walls = covered_only ? covered_walls(scene, scene.human_path.size()) : scene.walls;
    std::vector<Box2> gt_boxes;
    for (const auto& o : scene.objects) gt_boxes.push_back(o.box);
    ReportRow r;
    r.name = p.stem().string();
    r.lm = metrics::f1_at_tolerance(layout.walls, gt_walls, cfg.f1_tol, cfg.metric_spacing);
    r.om = metrics::iou_dice(layout.objects, gt_boxes, cfg.iou_resolution);
    rows.push_back(r);
  }
  if (out_csv.has_parent_path()) ensure_dir(out_csv.parent_path());
  io::write_text(out_csv, report_csv(rows, cfg));
}

void run_plot(const std::vector<fs::path>& inputs, const fs::path& out_svg) {
  if (inputs.empty()) throw DataError("plot: no inputs");
  plot::Figure fig;
  std::optional<Point2> radar;
  std::vector<std::vector<std::string>> map_rows;
  for (const auto& path : inputs) {
    const std::string text = io::read_text(path);
    const std::string first = text.substr(0, text.find('\n'));
    if (text.find("\"" + std::string(io::kSceneSchema) + "\"") != std::string::npos) {
      const Scene s = io::parse_scene(text);
      fig.gt_walls.insert(fig.gt_walls.end(), s.walls.begin(), s.walls.end());
      for (const auto& o : s.objects) fig.gt_boxes.push_back(o.box);
      fig.trajectory.insert(fig.trajectory.end(), s.human_path.begin(), s.human_path.end());
      fig.radars.push_back(s.radar);
      radar = s.radar;
    } else if (text.find("\"" + std::string(io::kLayoutSchema) + "\"") != std::string::npos) {
      const io::LayoutFile l = io::parse_layout(text);
      fig.walls.insert(fig.walls.end(), l.walls.begin(), l.walls.end());
      fig.boxes.insert(fig.boxes.end(), l.objects.begin(), l.objects.end());
    } else if (first.rfind("frame_id,order,c1_x", 0) == 0) {
      for (const auto& r : io::parse_cloud_csv(text)) fig.cloud.push_back(r.c1);
    } else if (first.rfind("range_bin,aoa_bin,aod_bin,range_m", 0) == 0) {
      std::istringstream in(text);
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::istringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) cols.push_back(c);
        if (cols.size() != 7) throw DataError("plot: malformed map row in " + path.string());
        map_rows.push_back(std::move(cols));
      }
    } else {
      throw DataError("plot: unknown input kind: " + path.string());
    }
  }
  if (!map_rows.empty()) {
    double mx = 0.0;
    std::vector<std::pair<Polar, double>> dots;
    for (const auto& c : map_rows) {
      try {
        dots.push_back({{std::stod(c[3]), std::stod(c[4])}, std::stod(c[6])});
      } catch (const std::exception&) {
        throw DataError("plot: non-numeric map row");
      }
      mx = std::max(mx, dots.back().second);
    }
    for (const auto& [p, v] : dots)
      fig.map.push_back({from_polar(radar.value_or(Point2{}), p), mx > 0.0 ? v / mx : 0.0});
  }
  if (out_svg.has_parent_path()) ensure_dir(out_svg.parent_path());
  io::write_text(out_svg, plot::render_svg(fig));
}

std::size_t run_gen_dataset(const fs::path& out_dir, std::size_t n_plans, const DatasetConfig& dcfg,
                            std::uint64_t seed) {
  if (n_plans == 0) throw DataError("gen-dataset: --plans must be >= 1");
  std::vector<GeneratedPlan> plans;
  for (std::size_t p = 0; p < n_plans; ++p) plans.push_back(simgen::generate_plan(derive_seed(seed, p)));
  return simgen::gen_dataset(plans, dcfg, seed, out_dir).size();
}

}  // namespace ghostscope::cli
