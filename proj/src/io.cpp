#include "ghostscope/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "ghostscope/error.hpp"

namespace ghostscope::io {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little, "GSC1 I/O assumes a little-endian host");

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("write failed for " + path.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw DataError("cannot write " + path.string() + ": " + ec.message());
}

namespace {

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(what + ": invalid JSON: " + e.what());
  }
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) throw DataError(path + "." + key + " required");
  return obj.at(key);
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw DataError(path + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw DataError(path + " must be finite");
  return d;
}

Point2 point(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) throw DataError(path + " must be an [x, y] array");
  return {number(v[0], path + "[0]"), number(v[1], path + "[1]")};
}

Segment2 segment(const json& v, const std::string& path) {
  return {point(require(v, "a", path), path + ".a"), point(require(v, "b", path), path + ".b")};
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok) throw DataError(path + "." + it.key() + " is not a recognised field");
  }
}

ojson pt(Point2 p) { return ojson::array({p.x, p.y}); }

}  // namespace

Scene parse_scene(const std::string& text) {
  const json j = parse_json(text, "scene");
  if (!j.is_object()) throw DataError("scene must be a JSON object");
  check_keys(j, {"schema", "radar", "human_path", "trajectory", "walls", "objects", "frame_rate_hz", "name"}, "scene");
  const json& schema = require(j, "schema", "scene");
  if (!schema.is_string() || schema.get<std::string>() != kSceneSchema)
    throw DataError(std::string("scene.schema must be \"") + kSceneSchema + "\"");

  Scene s;
  s.radar = point(require(j, "radar", "scene"), "scene.radar");
  if (j.contains("frame_rate_hz")) {
    s.frame_rate_hz = number(j["frame_rate_hz"], "scene.frame_rate_hz");
    if (!(s.frame_rate_hz > 0.0)) throw DataError("scene.frame_rate_hz must be > 0");
  }

  if (j.contains("human_path")) {
    const json& hp = j["human_path"];
    if (!hp.is_array()) throw DataError("scene.human_path must be an array");
    for (std::size_t i = 0; i < hp.size(); ++i)
      s.human_path.push_back(point(hp[i], "scene.human_path[" + std::to_string(i) + "]"));
  } else if (j.contains("trajectory")) {
    const json& t = j["trajectory"];
    check_keys(t, {"kind", "center", "radii", "frames", "turns", "phase_deg"}, "scene.trajectory");
    const json& kind = require(t, "kind", "scene.trajectory");
    if (kind != "ellipse") throw DataError("scene.trajectory.kind must be \"ellipse\"");
    const Point2 c = point(require(t, "center", "scene.trajectory"), "scene.trajectory.center");
    const Point2 r = point(require(t, "radii", "scene.trajectory"), "scene.trajectory.radii");
    const double frames = number(require(t, "frames", "scene.trajectory"), "scene.trajectory.frames");
    const double turns = t.contains("turns") ? number(t["turns"], "scene.trajectory.turns") : 1.0;
    const double phase = t.contains("phase_deg") ? number(t["phase_deg"], "scene.trajectory.phase_deg") : 0.0;
    if (!(frames >= 1.0) || frames != std::floor(frames)) throw DataError("scene.trajectory.frames must be a positive integer");
    const auto n = static_cast<std::size_t>(frames);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = deg2rad(phase) + 2.0 * std::numbers::pi * turns * static_cast<double>(i) / static_cast<double>(n);
      s.human_path.push_back({c.x + r.x * std::cos(a), c.y + r.y * std::sin(a)});
    }
  } else {
    throw DataError("scene.human_path required");
  }
  if (s.human_path.empty()) throw DataError("scene.human_path must not be empty");

  if (j.contains("walls")) {
    const json& w = j["walls"];
    if (!w.is_array()) throw DataError("scene.walls must be an array");
    for (std::size_t i = 0; i < w.size(); ++i) s.walls.push_back(segment(w[i], "scene.walls[" + std::to_string(i) + "]"));
  }
  if (j.contains("objects")) {
    const json& o = j["objects"];
    if (!o.is_array()) throw DataError("scene.objects must be an array");
    for (std::size_t i = 0; i < o.size(); ++i) {
      const std::string p = "scene.objects[" + std::to_string(i) + "]";
      check_keys(o[i], {"box", "reflective_segment"}, p);
      const json& b = require(o[i], "box", p);
      SceneObject obj;
      obj.box.center = point(require(b, "center", p + ".box"), p + ".box.center");
      obj.box.half_extents = point(require(b, "half_extents", p + ".box"), p + ".box.half_extents");
      obj.reflective = segment(require(o[i], "reflective_segment", p), p + ".reflective_segment");
      s.objects.push_back(obj);
    }
  }
  validate(s);
  return s;
}

Scene load_scene(const fs::path& path) { return parse_scene(read_text(path)); }

std::string scene_to_json(const Scene& s) {
  ojson j;
  j["schema"] = kSceneSchema;
  j["radar"] = pt(s.radar);
  j["frame_rate_hz"] = s.frame_rate_hz;
  ojson hp = ojson::array();
  for (auto p : s.human_path) hp.push_back(pt(p));
  j["human_path"] = hp;
  ojson w = ojson::array();
  for (const auto& seg : s.walls) w.push_back({{"a", pt(seg.a)}, {"b", pt(seg.b)}});
  j["walls"] = w;
  ojson o = ojson::array();
  for (const auto& obj : s.objects)
    o.push_back({{"box", {{"center", pt(obj.box.center)}, {"half_extents", pt(obj.box.half_extents)}}},
                 {"reflective_segment", {{"a", pt(obj.reflective.a)}, {"b", pt(obj.reflective.b)}}}});
  j["objects"] = o;
  return j.dump(2) + "\n";
}

LayoutFile parse_layout(const std::string& text) {
  const json j = parse_json(text, "layout");
  if (!j.is_object()) throw DataError("layout must be a JSON object");
  check_keys(j, {"schema", "walls", "objects"}, "layout");
  const json& schema = require(j, "schema", "layout");
  if (!schema.is_string() || schema.get<std::string>() != kLayoutSchema)
    throw DataError(std::string("layout.schema must be \"") + kLayoutSchema + "\"");
  LayoutFile lf;
  const json& w = require(j, "walls", "layout");
  if (!w.is_array()) throw DataError("layout.walls must be an array");
  for (std::size_t i = 0; i < w.size(); ++i) {
    const std::string p = "layout.walls[" + std::to_string(i) + "]";
    check_keys(w[i], {"a", "b", "rms"}, p);
    lf.walls.push_back(segment(w[i], p));
    lf.rms.push_back(w[i].contains("rms") ? number(w[i]["rms"], p + ".rms") : 0.0);
  }
  const json& o = require(j, "objects", "layout");
  if (!o.is_array()) throw DataError("layout.objects must be an array");
  for (std::size_t i = 0; i < o.size(); ++i) {
    const std::string p = "layout.objects[" + std::to_string(i) + "]";
    check_keys(o[i], {"center", "half_extents"}, p);
    lf.objects.push_back({point(require(o[i], "center", p), p + ".center"),
                          point(require(o[i], "half_extents", p), p + ".half_extents")});
  }
  return lf;
}

LayoutFile load_layout(const fs::path& path) { return parse_layout(read_text(path)); }

std::string layout_to_json(const LayoutHypothesis& hyp) {
  ojson j;
  j["schema"] = kLayoutSchema;
  ojson w = ojson::array();
  for (const auto& f : hyp.walls) w.push_back({{"a", pt(f.segment.a)}, {"b", pt(f.segment.b)}, {"rms", f.residual_rms}});
  j["walls"] = w;
  ojson o = ojson::array();
  for (const auto& b : hyp.objects) o.push_back({{"center", pt(b.center)}, {"half_extents", pt(b.half_extents)}});
  j["objects"] = o;
  return j.dump(2) + "\n";
}

namespace {

struct Header {
  std::uint32_t d0, d1, d2;
  double f0, f1, f2, f3;
};

std::string encode(const Header& h, const std::vector<float>& payload) {
  std::string out("GSC1");
  auto put = [&](const void* p, std::size_t n) { out.append(static_cast<const char*>(p), n); };
  put(&h.d0, 4);
  put(&h.d1, 4);
  put(&h.d2, 4);
  put(&h.f0, 8);
  put(&h.f1, 8);
  put(&h.f2, 8);
  put(&h.f3, 8);
  put(payload.data(), payload.size() * sizeof(float));
  return out;
}

template <class Power>
void write_power(const fs::path& path, Header h, const Power& power) {
  std::vector<float> payload;
  payload.reserve(2 * power.size());
  for (double v : power) {
    payload.push_back(static_cast<float>(v));
    payload.push_back(0.0f);
  }
  write_text(path, encode(h, payload));
}

}  // namespace

void write_cube(const fs::path& path, const RadarCube& cube) {
  const auto& c = cube.config;
  std::vector<float> payload;
  payload.reserve(2 * cube.data.size());
  for (const auto& v : cube.data) {
    payload.push_back(static_cast<float>(v.real()));
    payload.push_back(static_cast<float>(v.imag()));
  }
  const Header h{static_cast<std::uint32_t>(c.n_tx), static_cast<std::uint32_t>(c.n_rx),
                 static_cast<std::uint32_t>(c.n_samples), c.wavelength, c.d_tx, c.d_rx, c.range_resolution};
  write_text(path, encode(h, payload));
}

RadarCube read_cube(const fs::path& path, std::size_t frame_id) {
  const std::string bytes = read_text(path);
  constexpr std::size_t kHeader = 4 + 3 * 4 + 4 * 8;
  if (bytes.size() < kHeader || bytes.compare(0, 4, "GSC1") != 0)
    throw DataError(path.string() + ": not a GSC1 file");
  Header h;
  const char* p = bytes.data() + 4;
  std::memcpy(&h.d0, p, 4);
  std::memcpy(&h.d1, p + 4, 4);
  std::memcpy(&h.d2, p + 8, 4);
  std::memcpy(&h.f0, p + 12, 8);
  std::memcpy(&h.f1, p + 20, 8);
  std::memcpy(&h.f2, p + 28, 8);
  std::memcpy(&h.f3, p + 36, 8);
  RadarConfig cfg;
  cfg.n_tx = h.d0;
  cfg.n_rx = h.d1;
  cfg.n_samples = h.d2;
  cfg.wavelength = h.f0;
  cfg.d_tx = h.f1;
  cfg.d_rx = h.f2;
  cfg.range_resolution = h.f3;
  validate(cfg);
  const std::size_t n = cfg.n_tx * cfg.n_rx * cfg.n_samples;
  if (bytes.size() != kHeader + n * 2 * sizeof(float))
    throw DataError(path.string() + ": payload size does not match header dimensions");
  RadarCube cube(cfg, frame_id);
  const char* d = bytes.data() + kHeader;
  for (std::size_t i = 0; i < n; ++i) {
    float re, im;
    std::memcpy(&re, d + 8 * i, 4);
    std::memcpy(&im, d + 8 * i + 4, 4);
    if (!std::isfinite(re) || !std::isfinite(im)) throw DataError(path.string() + ": non-finite sample");
    cube.data[i] = {re, im};
  }
  return cube;
}

void write_map(const fs::path& path, const RangeAngleMap& map) {
  write_power(path,
              {static_cast<std::uint32_t>(map.n_range), static_cast<std::uint32_t>(map.grid.count), 1u,
               map.grid.start_deg, map.grid.step_deg, 0.0, map.range_resolution},
              map.power);
}

void write_map(const fs::path& path, const BiAngularCube& cube) {
  write_power(path,
              {static_cast<std::uint32_t>(cube.n_range), static_cast<std::uint32_t>(cube.grid.count),
               static_cast<std::uint32_t>(cube.grid.count), cube.grid.start_deg, cube.grid.step_deg, 0.0,
               cube.range_resolution},
              cube.power);
}

namespace {

std::ostringstream csv_stream() {
  std::ostringstream os;
  os << std::setprecision(10);
  return os;
}

void ghost_row(std::ostream& os, std::size_t frame, std::string_view label, const Detection& d) {
  os << frame << ',' << label << ',' << d.polar.range << ',' << d.polar.angle_deg << ',' << d.aoa_deg << ','
     << d.aod_deg << ',' << d.magnitude << '\n';
}

}  // namespace

std::string ghosts_csv_header() { return "frame_id,label,range_m,angle_deg,aoa_deg,aod_deg,magnitude\n"; }

std::string ghost_rows(const GhostSet& gs) {
  auto os = csv_stream();
  ghost_row(os, gs.frame_id, "H", gs.h);
  if (gs.g1) ghost_row(os, gs.frame_id, "G1", *gs.g1);
  if (gs.g1p) ghost_row(os, gs.frame_id, "G1p", *gs.g1p);
  if (gs.g2) ghost_row(os, gs.frame_id, "G2", *gs.g2);
  if (gs.g2p) ghost_row(os, gs.frame_id, "G2p", *gs.g2p);
  return os.str();
}

std::string oracle_csv(const Scene& scene, const RadarConfig& cfg, std::size_t n_frames) {
  auto os = csv_stream();
  os << "frame_id,label,range_m,angle_deg,aoa_deg,aod_deg,magnitude,reflector,bounce_x,bounce_y\n";
  for (std::size_t f = 0; f < n_frames; ++f)
    for (const auto& g : geom::ghost_oracle(scene, f)) {
      const double amp = std::pow(cfg.bounce_attenuation, g.bounces);
      os << f << ',' << geom::label_name(g.label) << ',' << g.polar.range << ',' << g.polar.angle_deg << ','
         << g.aoa_deg << ',' << g.aod_deg << ',' << amp * amp << ',' << g.reflector << ',' << g.bounce_point.x << ','
         << g.bounce_point.y << '\n';
    }
  return os.str();
}

std::string cloud_csv(const ReflectorCloud& cloud) {
  auto os = csv_stream();
  os << "frame_id,order,c1_x,c1_y,sp_x,sp_y,sc1_m\n";
  for (const auto& e : cloud.points)
    os << e.frame_id << ',' << static_cast<int>(e.order) << ',' << e.c1.x << ',' << e.c1.y << ','
       << e.mirror_source.x << ',' << e.mirror_source.y << ',' << e.sc1 << '\n';
  return os.str();
}

std::vector<CloudRow> parse_cloud_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("frame_id,order,c1_x", 0) != 0)
    throw DataError("cloud CSV: unexpected header");
  std::vector<CloudRow> rows;
  for (std::size_t ln = 2; std::getline(in, line); ++ln) {
    if (line.empty()) continue;
    CloudRow r;
    char c;
    std::istringstream ls(line);
    if (!(ls >> r.frame_id >> c >> r.order >> c >> r.c1.x >> c >> r.c1.y >> c >> r.sp.x >> c >> r.sp.y >> c >> r.sc1))
      throw DataError("cloud CSV line " + std::to_string(ln) + " is malformed");
    rows.push_back(r);
  }
  return rows;
}

std::string map_csv(const RangeAngleMap& map, double min_relative) {
  auto os = csv_stream();
  os << "range_bin,aoa_bin,aod_bin,range_m,aoa_deg,aod_deg,value\n";
  double mx = 0.0;
  for (double v : map.power) mx = std::max(mx, v);
  for (std::size_t k = 0; k < map.n_range; ++k)
    for (std::size_t a = 0; a < map.grid.count; ++a) {
      const double v = map.at(k, a);
      if (min_relative > 0.0 && v < min_relative * mx) continue;
      os << k << ',' << a << ',' << a << ',' << static_cast<double>(k) * map.range_resolution << ','
         << map.grid.angle(a) << ',' << map.grid.angle(a) << ',' << v << '\n';
    }
  return os.str();
}

std::string refine_log_csv(const std::vector<RefineLogEntry>& log) {
  auto os = csv_stream();
  os << "iter,loss,move\n";
  for (const auto& e : log) os << e.iter << ',' << e.loss << ',' << e.move << '\n';
  return os.str();
}

void write_pgm(const fs::path& path, const Raster& r) {
  std::string out = "P5\n" + std::to_string(r.width) + " " + std::to_string(r.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(r.pixels.data()), r.pixels.size());
  write_text(path, out);
}

Raster read_pgm(const fs::path& path) {
  const std::string bytes = read_text(path);
  std::istringstream in(bytes);
  std::string magic;
  std::size_t w = 0, h = 0, maxv = 0;
  in >> magic >> w >> h >> maxv;
  if (magic != "P5" || maxv != 255 || !in) throw DataError(path.string() + ": not an 8-bit P5 PGM");
  in.get();
  const auto off = static_cast<std::size_t>(in.tellg());
  if (bytes.size() != off + w * h) throw DataError(path.string() + ": truncated PGM");
  Raster r;
  r.width = w;
  r.height = h;
  r.pixels.assign(bytes.begin() + static_cast<long>(off), bytes.end());
  return r;
}

}  // namespace ghostscope::io
