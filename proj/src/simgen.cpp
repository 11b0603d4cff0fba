#include "ghostscope/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include <omp.h>

#include "json.hpp"

#include "ghostscope/error.hpp"
#include "ghostscope/io.hpp"
#include "ghostscope/seed.hpp"

namespace ghostscope {

std::vector<Segment2> FloorPlan::outline_edges() const {
  std::vector<Segment2> e;
  for (std::size_t i = 0; i < outline.size(); ++i) e.push_back({outline[i], outline[(i + 1) % outline.size()]});
  return e;
}

std::vector<Segment2> FloorPlan::all_walls() const {
  auto e = outline_edges();
  e.insert(e.end(), inner_walls.begin(), inner_walls.end());
  return e;
}

bool Raster::to_pixel(Point2 p, std::size_t& col, std::size_t& row) const {
  const double cx = std::floor((p.x - origin.x) / resolution);
  const double cy = std::floor((origin.y - p.y) / resolution);
  if (cx < 0 || cy < 0 || cx >= static_cast<double>(width) || cy >= static_cast<double>(height)) return false;
  col = static_cast<std::size_t>(cx);
  row = static_cast<std::size_t>(cy);
  return true;
}

void Raster::set(Point2 p, unsigned char v) {
  std::size_t c, r;
  if (to_pixel(p, c, r)) pixels[r * width + c] = v;
}

namespace simgen {

namespace {

double wrap360(double a) {
  a = std::fmod(a, 360.0);
  return a < 0.0 ? a + 360.0 : a;
}

std::optional<double> ray_hit(Point2 o, Point2 u, const Segment2& s) {
  const Point2 e = s.b - s.a;
  const double den = cross(u, e);
  if (std::abs(den) < 1e-15) return std::nullopt;
  const Point2 w = s.a - o;
  const double t = cross(w, e) / den;
  const double v = cross(w, u) / den;
  if (t <= 1e-12 || v < -1e-12 || v > 1.0 + 1e-12) return std::nullopt;
  return t;
}

}  // namespace

bool point_in_polygon(Point2 p, const std::vector<Point2>& poly) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point2 a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) inside = !inside;
  }
  return inside;
}

PartialObservation raycast(const FloorPlan& plan, const std::vector<SceneObject>& objects, Point2 radar,
                           std::size_t n_rays, double heading_deg) {
  if (plan.outline.size() < 3) throw DataError("raycast: outline needs at least 3 vertices");
  if (!point_in_polygon(radar, plan.outline)) throw DataError("raycast: radar is outside the floor plan");
  for (std::size_t i = 0; i < objects.size(); ++i)
    if (objects[i].box.contains(radar)) throw DataError("raycast: radar is inside object " + std::to_string(i));

  auto segs = plan.all_walls();
  for (const auto& o : objects) segs.push_back(o.reflective);

  PartialObservation obs;
  obs.radar = radar;
  obs.heading_deg = heading_deg;
  for (std::size_t i = 0; i < n_rays; ++i) {
    const double az = deg2rad(heading_deg + 360.0 * static_cast<double>(i) / static_cast<double>(n_rays));
    const Point2 u{std::cos(az), std::sin(az)};
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : segs)
      if (auto t = ray_hit(radar, u, s); t && *t < best) best = *t;
    if (std::isfinite(best)) obs.visible_points.push_back(radar + best * u);
  }
  return obs;
}

double azimuth(const PartialObservation& obs, Point2 p) {
  return wrap360(rad2deg(std::atan2(p.y - obs.radar.y, p.x - obs.radar.x)) - obs.heading_deg);
}

bool in_arcs(double az, const std::vector<AzimuthArc>& arcs) {
  for (auto [lo, hi] : arcs) {
    if (hi - lo >= 360.0) return true;
    const double l = wrap360(lo), h = wrap360(hi);
    if (l <= h ? (az >= l && az <= h) : (az >= l || az <= h)) return true;
  }
  return false;
}

PartialObservation augment_missing(const PartialObservation& obs, const std::vector<AzimuthArc>& del) {
  PartialObservation out = obs;
  out.visible_points.clear();
  for (auto p : obs.visible_points)
    if (!in_arcs(azimuth(obs, p), del)) out.visible_points.push_back(p);
  return out;
}

PartialObservation augment_rotate(const PartialObservation& obs, const std::vector<AzimuthArc>& arcs,
                                  double alpha_deg, Point2 center) {
  PartialObservation out = obs;
  const double c = std::cos(deg2rad(alpha_deg)), s = std::sin(deg2rad(alpha_deg));
  for (auto& p : out.visible_points) {
    if (!in_arcs(azimuth(obs, p), arcs)) continue;
    const double dx = p.x - center.x, dy = p.y - center.y;
    p = {c * dx - s * dy + center.x, s * dx + c * dy + center.y};
  }
  return out;
}

PartialObservation augment_scale(const PartialObservation& obs, double a) {
  if (!(a > 0.0)) throw DataError("augment_scale: factor must be > 0");
  PartialObservation out = obs;
  for (auto& p : out.visible_points) p = obs.radar + a * (p - obs.radar);
  return out;
}

PartialObservation augment(const PartialObservation& obs, const AugmentConfig& cfg) {
  const auto scaled = augment_scale(obs, cfg.scale);
  const auto rotated = augment_rotate(scaled, cfg.rot_intervals, cfg.alpha_deg, obs.radar);
  return augment_missing(rotated, cfg.del_intervals);
}

GeneratedPlan generate_plan(std::uint64_t seed, const PlanGenConfig& cfg) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> side(cfg.min_side, cfg.max_side);
  const double w = side(rng), h = side(rng);
  GeneratedPlan g;
  g.plan.outline = {{0, 0}, {w, 0}, {w, h}, {0, h}};

  std::uniform_int_distribution<int> n_inner(0, cfg.max_inner_walls);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int ni = n_inner(rng);
  for (int i = 0; i < ni; ++i) {
    // partial wall growing inward from a random outline edge
    const int edge = static_cast<int>(u01(rng) * 4.0) % 4;
    const double f = 0.2 + 0.6 * u01(rng);
    const double len = 0.3 + 0.3 * u01(rng);
    Segment2 s;
    switch (edge) {
      case 0: s = {{f * w, 0}, {f * w, len * h}}; break;
      case 1: s = {{w, f * h}, {w - len * w, f * h}}; break;
      case 2: s = {{f * w, h}, {f * w, h - len * h}}; break;
      default: s = {{0, f * h}, {len * w, f * h}}; break;
    }
    g.plan.inner_walls.push_back(s);
  }

  std::uniform_int_distribution<int> n_box(0, cfg.max_boxes);
  std::uniform_real_distribution<double> bsize(cfg.box_min, cfg.box_max);
  const int nb = n_box(rng);
  for (int i = 0, tries = 0; i < nb && tries < 200; ++tries) {
    const double bw = std::min(bsize(rng), 0.4 * w), bh = std::min(bsize(rng), 0.4 * h);
    const Box2 b{{0.1 + bw / 2 + u01(rng) * (w - bw - 0.2), 0.1 + bh / 2 + u01(rng) * (h - bh - 0.2)},
                 {bw / 2, bh / 2}};
    const bool clash = std::any_of(g.objects.begin(), g.objects.end(), [&](const SceneObject& o) {
      return std::abs(o.box.center.x - b.center.x) < o.box.half_extents.x + b.half_extents.x + 0.1 &&
             std::abs(o.box.center.y - b.center.y) < o.box.half_extents.y + b.half_extents.y + 0.1;
    });
    if (clash) continue;
    const int face = static_cast<int>(u01(rng) * 4.0) % 4;
    const Point2 lo{b.min_x(), b.min_y()}, hi{b.max_x(), b.max_y()};
    Segment2 f;
    switch (face) {
      case 0: f = {lo, {hi.x, lo.y}}; break;
      case 1: f = {{hi.x, lo.y}, hi}; break;
      case 2: f = {hi, {lo.x, hi.y}}; break;
      default: f = {{lo.x, hi.y}, lo}; break;
    }
    g.objects.push_back({b, f});
    ++i;
  }
  return g;
}

Raster make_canvas(Point2 center, double size, double resolution) {
  Raster r;
  r.resolution = resolution;
  r.width = r.height = static_cast<std::size_t>(std::llround(size / resolution));
  r.origin = {center.x - size / 2.0, center.y + size / 2.0};
  r.pixels.assign(r.width * r.height, 0);
  return r;
}

void draw_segment(Raster& r, const Segment2& s) {
  const auto n = static_cast<std::size_t>(std::ceil(4.0 * s.length() / r.resolution)) + 1;
  for (std::size_t i = 0; i <= n; ++i) r.set(s.a + (static_cast<double>(i) / static_cast<double>(n)) * (s.b - s.a));
}

void fill_box(Raster& r, const Box2& b) {
  for (std::size_t row = 0; row < r.height; ++row)
    for (std::size_t col = 0; col < r.width; ++col) {
      const Point2 c{r.origin.x + (static_cast<double>(col) + 0.5) * r.resolution,
                     r.origin.y - (static_cast<double>(row) + 0.5) * r.resolution};
      if (c.x >= b.min_x() && c.x <= b.max_x() && c.y >= b.min_y() && c.y <= b.max_y())
        r.pixels[row * r.width + col] = 255;
    }
  draw_segment(r, {{b.min_x(), b.min_y()}, {b.max_x(), b.min_y()}});
  draw_segment(r, {{b.max_x(), b.min_y()}, {b.max_x(), b.max_y()}});
  draw_segment(r, {{b.max_x(), b.max_y()}, {b.min_x(), b.max_y()}});
  draw_segment(r, {{b.min_x(), b.max_y()}, {b.min_x(), b.min_y()}});
}

namespace {

Point2 sample_radar(const GeneratedPlan& g, std::mt19937_64& rng) {
  double x0 = g.plan.outline[0].x, x1 = x0, y0 = g.plan.outline[0].y, y1 = y0;
  for (auto p : g.plan.outline) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1);
  const auto walls = g.plan.all_walls();
  for (int t = 0; t < 10000; ++t) {
    const Point2 p{ux(rng), uy(rng)};
    if (!point_in_polygon(p, g.plan.outline)) continue;
    if (std::any_of(walls.begin(), walls.end(), [&](const Segment2& s) { return point_segment_distance(p, s) < 0.3; }))
      continue;
    if (std::any_of(g.objects.begin(), g.objects.end(), [&](const SceneObject& o) {
          Box2 grown = o.box;
          grown.half_extents += Point2{0.2, 0.2};
          return grown.contains(p);
        }))
      continue;
    return p;
  }
  throw DataError("gen_dataset: no free radar position in plan");
}

std::vector<AzimuthArc> sample_arcs(std::mt19937_64& rng, const DatasetConfig& cfg) {
  std::uniform_int_distribution<int> count(cfg.min_arcs, cfg.max_arcs);
  std::uniform_real_distribution<double> start(0.0, 360.0), width(cfg.arc_min_deg, cfg.arc_max_deg);
  std::vector<AzimuthArc> arcs;
  const int n = count(rng);
  for (int tries = 0; static_cast<int>(arcs.size()) < n && tries < 100; ++tries) {
    const double lo = start(rng), hi = lo + width(rng);
    // disjoint from the arcs already chosen (compare on the circle)
    const bool overlap = std::any_of(arcs.begin(), arcs.end(), [&](const AzimuthArc& a) {
      const double d = std::fmod(std::abs(0.5 * (lo + hi) - 0.5 * (a.first + a.second)), 360.0);
      const double sep = std::min(d, 360.0 - d);
      return sep < 0.5 * ((hi - lo) + (a.second - a.first));
    });
    if (!overlap) arcs.push_back({std::fmod(lo, 360.0), std::fmod(lo, 360.0) + (hi - lo)});
  }
  return arcs;
}

std::string arcs_text(const std::vector<AzimuthArc>& arcs) {
  std::ostringstream os;
  os << std::setprecision(10);
  for (std::size_t i = 0; i < arcs.size(); ++i) os << (i ? ";" : "") << arcs[i].first << ":" << arcs[i].second;
  return os.str();
}

}  // namespace

std::vector<ManifestRow> gen_dataset(const std::vector<GeneratedPlan>& plans, const DatasetConfig& cfg,
                                     std::uint64_t seed, const std::filesystem::path& out_dir) {
  if (plans.empty()) throw DataError("gen_dataset: no floor plans");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir))
    throw DataError("gen_dataset: cannot create output directory " + out_dir.string());

  const std::size_t n = plans.size() * cfg.poses_per_plan;
  std::vector<ManifestRow> rows(n);
  std::vector<std::string> errors(n);

  const int threads = cfg.jobs > 0 ? cfg.jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t s = 0; s < n; ++s) {
    try {
      ManifestRow& row = rows[s];
      row.sample = s;
      row.plan = s / cfg.poses_per_plan;
      row.pose = s % cfg.poses_per_plan;
      row.seed = derive_seed(seed, s);
      std::mt19937_64 rng(row.seed);
      const GeneratedPlan& g = plans[row.plan];

      row.radar = sample_radar(g, rng);
      row.heading_deg = std::uniform_real_distribution<double>(0.0, 360.0)(rng);
      const auto clean = raycast(g.plan, g.objects, row.radar, cfg.n_rays, row.heading_deg);

      row.augment.del_intervals = sample_arcs(rng, cfg);
      row.augment.rot_intervals = sample_arcs(rng, cfg);
      row.augment.alpha_deg = std::uniform_real_distribution<double>(-cfg.alpha_max_deg, cfg.alpha_max_deg)(rng);
      row.augment.scale = std::uniform_real_distribution<double>(cfg.scale_min, cfg.scale_max)(rng);
      const auto aug = augment(clean, row.augment);
      row.n_visible = aug.visible_points.size();

      Raster wall = make_canvas(row.radar, cfg.canvas, cfg.resolution);
      Raster object = wall, obs = wall, obs_clean = wall;
      for (const auto& w : g.plan.all_walls()) draw_segment(wall, w);
      for (const auto& o : g.objects) fill_box(object, o.box);
      for (auto p : aug.visible_points) obs.set(p);
      for (auto p : clean.visible_points) obs_clean.set(p);

      char stem[32];
      std::snprintf(stem, sizeof stem, "sample_%05zu", s);
      row.wall_pgm = std::string(stem) + "_wall.pgm";
      row.object_pgm = std::string(stem) + "_object.pgm";
      row.obs_pgm = std::string(stem) + "_obs.pgm";
      row.obs_clean_pgm = std::string(stem) + "_obs_clean.pgm";
      row.meta_json = std::string(stem) + "_meta.json";
      io::write_pgm(out_dir / row.wall_pgm, wall);
      io::write_pgm(out_dir / row.object_pgm, object);
      io::write_pgm(out_dir / row.obs_pgm, obs);
      io::write_pgm(out_dir / row.obs_clean_pgm, obs_clean);

      nlohmann::ordered_json meta;
      meta["schema"] = "ghostscope-sample-v1";
      meta["sample"] = s;
      meta["plan"] = row.plan;
      meta["seed"] = row.seed;
      meta["radar"] = {row.radar.x, row.radar.y};
      meta["heading_deg"] = row.heading_deg;
      meta["resolution_m"] = cfg.resolution;
      meta["canvas_m"] = cfg.canvas;
      meta["canvas_origin_top_left"] = {wall.origin.x, wall.origin.y};
      auto arcs_json = [](const std::vector<AzimuthArc>& arcs) {
        nlohmann::json a = nlohmann::json::array();
        for (auto [lo, hi] : arcs) a.push_back({lo, hi});
        return a;
      };
      meta["augment"] = {{"order", "missing(rotate(scale(obs)))"},
                         {"del_intervals_deg", arcs_json(row.augment.del_intervals)},
                         {"rot_intervals_deg", arcs_json(row.augment.rot_intervals)},
                         {"alpha_deg", row.augment.alpha_deg},
                         {"scale", row.augment.scale},
                         {"rotation_center", {row.radar.x, row.radar.y}}};
      nlohmann::json outline = nlohmann::json::array();
      for (auto p : g.plan.outline) outline.push_back({p.x, p.y});
      meta["outline"] = outline;
      nlohmann::json inner = nlohmann::json::array();
      for (const auto& w : g.plan.inner_walls) inner.push_back({{"a", {w.a.x, w.a.y}}, {"b", {w.b.x, w.b.y}}});
      meta["inner_walls"] = inner;
      nlohmann::json objs = nlohmann::json::array();
      for (const auto& o : g.objects)
        objs.push_back({{"center", {o.box.center.x, o.box.center.y}},
                        {"half_extents", {o.box.half_extents.x, o.box.half_extents.y}},
                        {"reflective_segment",
                         {{"a", {o.reflective.a.x, o.reflective.a.y}}, {"b", {o.reflective.b.x, o.reflective.b.y}}}}});
      meta["objects"] = objs;
      meta["n_visible"] = row.n_visible;
      io::write_text(out_dir / row.meta_json, meta.dump(2) + "\n");
    } catch (const std::exception& e) {
      errors[s] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw DataError(e);

  std::ostringstream csv;
  csv << std::setprecision(10);
  csv << "sample,plan,pose,seed,radar_x,radar_y,heading_deg,del_intervals,rot_intervals,alpha_deg,scale,n_visible,"
         "wall_pgm,object_pgm,obs_pgm,obs_clean_pgm,meta_json\n";
  for (const auto& r : rows)
    csv << r.sample << ',' << r.plan << ',' << r.pose << ',' << r.seed << ',' << r.radar.x << ',' << r.radar.y << ','
        << r.heading_deg << ',' << arcs_text(r.augment.del_intervals) << ',' << arcs_text(r.augment.rot_intervals)
        << ',' << r.augment.alpha_deg << ',' << r.augment.scale << ',' << r.n_visible << ',' << r.wall_pgm << ','
        << r.object_pgm << ',' << r.obs_pgm << ',' << r.obs_clean_pgm << ',' << r.meta_json << '\n';
  io::write_text(out_dir / "manifest.csv", csv.str());
  return rows;
}

}  // namespace simgen
}  // namespace ghostscope
