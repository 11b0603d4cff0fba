#include <doctest.h>

#include <random>

#include "ghostscope/error.hpp"
#include "ghostscope/inversion.hpp"
#include "support.hpp"

using namespace ghostscope;
using geom::GhostLabel;

namespace {

Detection det(double r, double ang, double mag) {
  Detection d;
  d.polar = {r, ang};
  d.aoa_deg = d.aod_deg = ang;
  d.magnitude = mag;
  return d;
}

bool same(const std::optional<Detection>& a, const std::optional<geom::GhostPath>& g) {
  if (!a || !g) return !a && !g;
  return std::abs(a->polar.range - g->polar.range) < 1e-12 && std::abs(a->polar.angle_deg - g->polar.angle_deg) < 1e-12;
}

bool same_set(const GhostSet& a, const GhostSet& b) {
  auto eq = [](const std::optional<Detection>& x, const std::optional<Detection>& y) {
    if (!x || !y) return !x && !y;
    return x->polar.range == y->polar.range && x->polar.angle_deg == y->polar.angle_deg &&
           x->aoa_deg == y->aoa_deg && x->aod_deg == y->aod_deg;
  };
  return eq(a.h, b.h) && eq(a.g1, b.g1) && eq(a.g1p, b.g1p) && eq(a.g2, b.g2) && eq(a.g2p, b.g2p);
}

}  // namespace

TEST_CASE("identify: canonical oracle detections") {
  const Scene scene = gs_test::canonical_scene();
  const auto paths = geom::ghost_oracle(scene, 0);
  const GhostSet gs = ghostid::identify(gs_test::oracle_detections(scene, 0));
  CHECK(gs.h.polar.range == doctest::Approx(1.41421).epsilon(1e-5));
  CHECK(gs.h.polar.angle_deg == doctest::Approx(45.0));
  CHECK(same(gs.g1, gs_test::find_label(paths, GhostLabel::G1)));
  CHECK(same(gs.g1p, gs_test::find_label(paths, GhostLabel::G1p)));
  CHECK(same(gs.g2, gs_test::find_label(paths, GhostLabel::G2)));
  CHECK(same(gs.g2p, gs_test::find_label(paths, GhostLabel::G2p)));
  REQUIRE(gs.g1p);
  CHECK(gs.g1p->polar.angle_deg == doctest::Approx(11.3099).epsilon(1e-5));
}

TEST_CASE("identify: trivial cases") {
  const GhostSet one = ghostid::identify({det(2.0, 80, 1.0)});
  CHECK(one.h.polar.range == 2.0);
  CHECK_FALSE(one.g1);
  CHECK_FALSE(one.g1p);
  CHECK_FALSE(one.g2);
  CHECK_FALSE(one.g2p);

  IdConfig c;
  c.delta_g1 = 1.5;
  const GhostSet two = ghostid::identify({det(1.1, 60, 0.8), det(1.0, 60, 1.0)}, c);
  CHECK(two.h.polar.range == 1.0);
  REQUIRE(two.g1);
  CHECK(two.g1->polar.range == 1.1);

  CHECK_THROWS_AS(ghostid::identify({}), DataError);
  IdConfig bad;
  bad.tau = 1.5;
  CHECK_THROWS_AS(ghostid::identify({det(1, 1, 1)}, bad), DataError);
}

TEST_CASE("identify reproduces oracle labels on random separable scenes; order invariant") {
  std::mt19937_64 rng(2024);
  const IdConfig cfg;
  int scenes = 0;
  while (scenes < 500) {
    const Scene s = gs_test::random_single_wall(rng);
    const auto paths = geom::ghost_oracle(s, 0);
    if (!gs_test::well_separated(paths, cfg)) continue;
    ++scenes;
    auto dets = gs_test::oracle_detections(s, 0);
    const GhostSet gs = ghostid::identify(dets, cfg);
    const bool ok = same(gs.g1, gs_test::find_label(paths, GhostLabel::G1)) &&
                    same(gs.g1p, gs_test::find_label(paths, GhostLabel::G1p)) &&
                    same(gs.g2, gs_test::find_label(paths, GhostLabel::G2)) &&
                    same(gs.g2p, gs_test::find_label(paths, GhostLabel::G2p)) &&
                    same(std::optional<Detection>(gs.h), gs_test::find_label(paths, GhostLabel::H));
    REQUIRE(ok);
    std::shuffle(dets.begin(), dets.end(), rng);
    CHECK(same_set(ghostid::identify(dets, cfg), gs));
  }
}

TEST_CASE("identify: removing a non-selected detection keeps the labels") {
  std::mt19937_64 rng(8);
  const Scene scene = gs_test::canonical_scene();
  auto dets = gs_test::oracle_detections(scene, 0);
  std::uniform_real_distribution<double> r(0.5, 8.0), a(0.0, 179.0), m(0.01, 0.05);
  for (int i = 0; i < 200; ++i) {
    auto more = dets;
    more.push_back(det(r(rng), a(rng), m(rng)));
    const GhostSet with = ghostid::identify(more);
    // Drop every detection that was not selected; the labels must not move.
    std::vector<Detection> kept;
    for (const auto* o : {&with.g1, &with.g1p, &with.g2, &with.g2p})
      if (*o) kept.push_back(**o);
    kept.push_back(with.h);
    CHECK(same_set(ghostid::identify(kept), with));
  }
}

TEST_CASE("identify_all splits multi-reflector frames") {
  Scene s = gs_test::canonical_scene();
  s.walls.push_back({{-3.5, -5}, {-3.5, 5}});
  const auto sets = ghostid::identify_all(gs_test::oracle_detections(s, 0));
  CHECK(sets.size() >= 1);
  for (const auto& g : sets) CHECK(g.h.polar.range == doctest::Approx(std::sqrt(2.0)));
  const auto lone = ghostid::identify_all({det(2.0, 80, 1.0)});
  REQUIRE(lone.size() == 1);
  CHECK_FALSE(lone[0].g1);
}

TEST_CASE("invert_first_bounce examples") {
  CHECK(inversion::invert_first_bounce({1.0, 2.0, 0.0, 0.0}) == doctest::Approx(2.0));
  const double sh = std::sqrt(2.0), sg = 3.256617;
  const double dth = 45.0 - 11.309932;
  BounceObservation o{sh, sg, 11.309932, 45.0};
  // numerator 12.0001, denominator 3.92232
  CHECK(inversion::invert_first_bounce(o) == doctest::Approx(3.059412).epsilon(1e-6));
  CHECK(2 * sg * sg - 2 * sg * sh == doctest::Approx(12.0001).epsilon(1e-5));
  CHECK(2 * sg - sh * std::cos(deg2rad(dth)) - sh == doctest::Approx(3.92232).epsilon(1e-5));
  CHECK_THROWS_WITH_AS(inversion::invert_first_bounce({1.0, 1.0, 30.0, 30.0}), "degenerate geometry",
                       DegenerateGeometry);
}

TEST_CASE("invert_second_bounce examples") {
  BounceObservation o{std::sqrt(2.0), 5.099020, 11.309932, 45.0, BounceOrder::Second};
  CHECK(inversion::invert_second_bounce(o) == doctest::Approx(3.059412).epsilon(1e-6));
  CHECK(inversion::invert_second_bounce({1.0, 3.0, 0.0, 0.0, BounceOrder::Second}) == doctest::Approx(2.0));
  // human at the radar: sg = 2 |sc1|
  CHECK(inversion::invert_second_bounce({0.0, 4.4, 20.0, 70.0, BounceOrder::Second}) == doctest::Approx(2.2));
}

TEST_CASE("estimate_reflector examples") {
  const Scene scene = gs_test::canonical_scene();
  const GhostSet gs = ghostid::identify(gs_test::oracle_detections(scene, 0));
  const auto est = inversion::estimate_reflector(gs, scene.radar);
  REQUIRE(est.size() == 2);
  for (const auto& e : est) {
    CHECK(std::abs(e.c1.x - 3.0) < 1e-6);
    CHECK(std::abs(e.c1.y - 0.6) < 1e-6);
    CHECK(std::abs(e.mirror_source.x - 6.0) < 1e-6);
    CHECK(std::abs(e.mirror_source.y) < 1e-6);
  }

  Scene col;
  col.radar = {0, 0};
  col.human_path = {{1, 0}};
  col.walls = {{{2, -5}, {2, 5}}};
  GhostSet c;
  c.h = det(1.0, 0.0, 1.0);
  c.g1 = det(2.0, 0.0, 0.25);
  c.g1p = det(2.0, 0.0, 0.25);
  const auto ce = inversion::estimate_reflector(c, col.radar);
  REQUIRE(ce.size() == 1);
  CHECK(ce[0].c1.x == doctest::Approx(2.0));
  CHECK(ce[0].c1.y == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ce[0].mirror_source.x == doctest::Approx(4.0));

  GhostSet only;
  only.h = det(1.0, 45.0, 1.0);
  CHECK(inversion::estimate_reflector(only, {0, 0}).empty());
}

TEST_CASE("accumulate") {
  ReflectorEstimate e;
  const auto cloud = inversion::accumulate({{e}, {}, {e}, {e}}, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  CHECK(cloud.points.size() == 3);
  CHECK(cloud.trajectory.size() == 4);
}

TEST_CASE("round trip over random scenes: exact c1, s', and first/second agreement") {
  std::mt19937_64 rng(99);
  const IdConfig idc;
  int scenes = 0;
  double worst = 0, worst_sc1 = 0;
  while (scenes < 500) {
    const Scene s = gs_test::random_single_wall(rng);
    const auto paths = geom::ghost_oracle(s, 0);
    if (!gs_test::well_separated(paths, idc)) continue;
    ++scenes;
    const Point2 c1 = gs_test::find_label(paths, GhostLabel::G1)->bounce_point;
    const Point2 sp = geom::mirror_point(s.radar, s.walls[0]);
    const auto est = inversion::estimate_reflector(ghostid::identify(gs_test::oracle_detections(s, 0), idc), s.radar);
    REQUIRE(est.size() == 2);
    for (const auto& e : est) worst = std::max({worst, distance(e.c1, c1), distance(e.mirror_source, sp)});
    worst_sc1 = std::max(worst_sc1, std::abs(est[0].sc1 - est[1].sc1));
  }
  CHECK(worst < 1e-6);
  CHECK(worst_sc1 < 1e-9);
}

TEST_CASE("canonical wall, 100-frame circular trajectory: all c1 on x = 3") {
  Scene s = gs_test::canonical_scene();
  s.human_path.clear();
  for (int i = 0; i < 100; ++i) {
    const double t = 2 * std::numbers::pi * i / 100.0;
    s.human_path.push_back({0.6 * std::cos(t), 2.0 + 0.6 * std::sin(t)});
  }
  std::size_t n = 0;
  IdConfig loose;
  loose.delta_r = 1e-3;
  for (std::size_t f = 0; f < s.human_path.size(); ++f) {
    for (const auto& e : inversion::estimate_reflector(ghostid::identify(gs_test::oracle_detections(s, f), loose), s.radar)) {
      CHECK(std::abs(e.c1.x - 3.0) < 1e-6);
      ++n;
    }
  }
  CHECK(n >= 100);
}

TEST_CASE("quantized observations: median c1 error under 15 cm") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> jitter(-1, 1);
  const IdConfig idc;
  const double res = RadarConfig{}.range_resolution;
  std::vector<double> err;
  while (err.size() < 500) {
    const Scene s = gs_test::random_single_wall(rng, 5.0);
    const auto paths = geom::ghost_oracle(s, 0);
    if (!gs_test::well_separated(paths, idc)) continue;
    const GhostSet gs = ghostid::identify(gs_test::oracle_detections(s, 0), idc);
    const Point2 truth = gs_test::find_label(paths, GhostLabel::G1)->bounce_point;
    auto q = [&](std::optional<Detection> d) {
      d->polar.range = (std::round(d->polar.range / res) + jitter(rng)) * res;
      d->polar.angle_deg = std::round(d->polar.angle_deg) + jitter(rng);
      return d;
    };
    GhostSet n = gs;
    n.h = *q(gs.h);
    n.g1 = q(gs.g1);
    n.g1p = q(gs.g1p);
    n.g2 = q(gs.g2);
    n.g2p = q(gs.g2p);
    InversionConfig ic;
    ic.max_range = 1e9;
    for (const auto& e : inversion::estimate_reflector(n, s.radar, ic))
      if (e.order == BounceOrder::First) err.push_back(distance(e.c1, truth));
  }
  std::nth_element(err.begin(), err.begin() + err.size() / 2, err.end());
  const double median = err[err.size() / 2];
  MESSAGE("median |c1 - truth| = ", median);
  CHECK(median < 0.15);
}
