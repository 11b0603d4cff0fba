#include <doctest.h>

#include <random>

#include "ghostscope/error.hpp"
#include "ghostscope/metrics.hpp"
#include "ghostscope/refine.hpp"

using namespace ghostscope;

namespace {

LayoutHypothesis hyp_of(const std::vector<Segment2>& walls, const std::vector<Box2>& boxes) {
  LayoutHypothesis h;
  for (const auto& w : walls) h.walls.push_back({w, {}, 0.0});
  h.objects = boxes;
  return h;
}

std::vector<Point2> line_path(Point2 a, Point2 b, std::size_t n) {
  std::vector<Point2> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(a + (double(i) / double(n - 1)) * (b - a));
  return out;
}

double direction_angle(const Segment2& s) { return std::atan2(s.b.y - s.a.y, s.b.x - s.a.x); }

}  // namespace

TEST_CASE("overlap_loss examples") {
  const auto free = line_path({0, 0}, {1, 0}, 10);
  CHECK(refine::overlap_loss(free, {{{0, 2}, {1, 2}}}, {{{3, 3}, {0.5, 0.5}}}, 0.1).total == 0);

  const auto box = refine::overlap_loss({{3, 3}}, {}, {{{3, 3}, {0.5, 0.5}}}, 0.1);
  CHECK(box.box_hits == 1);
  CHECK(box.total == 1);

  // 10 points at 10 cm spacing crossing x = 0.45; halfwidth 5 cm, brute-force band check.
  const auto path = line_path({0, 0}, {0.9, 0}, 10);
  const Segment2 wall{{0.45, -1}, {0.45, 1}};
  std::size_t oracle = 0;
  for (auto p : path) oracle += std::abs(p.x - 0.45) < 0.05;
  const auto l = refine::overlap_loss(path, {wall}, {}, 0.05);
  CHECK(l.wall_hits == oracle);
  CHECK(l.wall_hits == 1);

  // a point can count for both terms
  const auto both = refine::overlap_loss({{0, 0}}, {{{-1, 0}, {1, 0}}}, {{{0, 0}, {0.2, 0.2}}}, 0.1);
  CHECK(both.wall_hits == 1);
  CHECK(both.box_hits == 1);
  CHECK(both.total == 2);
}

TEST_CASE("refine_layout: collision-free input is returned unchanged") {
  const auto traj = line_path({0, 0}, {1, 0}, 20);
  const auto h = hyp_of({{{0, 1}, {1, 1}}}, {{{3, 0}, {0.3, 0.3}}});
  const auto r = refine::refine_layout(h, traj);
  CHECK(r.converged);
  CHECK(r.final_loss.total == 0);
  CHECK(r.layout.walls[0].segment.a == h.walls[0].segment.a);
  CHECK(r.layout.walls[0].segment.b == h.walls[0].segment.b);
  CHECK(r.layout.objects[0].center == h.objects[0].center);
  CHECK(r.layout.objects[0].half_extents == h.objects[0].half_extents);
}

TEST_CASE("refine_layout: box on a trajectory point escapes within ceil(dist/step) iterations") {
  const std::vector<Point2> traj{{0, 0}};
  const Box2 b{{0.03, 0.0}, {0.12, 0.12}};
  const auto r = refine::refine_layout(hyp_of({}, {b}), traj);
  CHECK(r.final_loss.total == 0);
  // leaving needs |cx| >= hx: 0.12 - 0.03 = 0.09 along x
  const double dist = 0.09;
  CHECK(r.log.back().iter <= std::size_t(std::ceil(dist / RefineConfig{}.step)));
}

TEST_CASE("refine_layout: wall across a corridor is moved clear, direction unchanged") {
  const auto traj = line_path({0, 0}, {0, 5}, 100);
  const Segment2 w{{-1.0, 2.5}, {0.3, 2.52}};
  const auto r = refine::refine_layout(hyp_of({w}, {}), traj);
  CHECK(r.converged);
  CHECK(std::abs(direction_angle(r.layout.walls[0].segment) - direction_angle(w)) < 1e-12);
  CHECK(refine::overlap_loss(traj, r.layout, RefineConfig{}.wall_halfwidth).total == 0);
}

TEST_CASE("refine_layout: monotone descent, invariant wall directions, idempotent at zero") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1, 1), h(0.1, 0.3);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Point2> traj;
    for (int i = 0; i < 60; ++i) {
      const double t = 2 * std::numbers::pi * i / 60.0;
      traj.push_back({1.2 * std::cos(t), 1.2 * std::sin(t)});
    }
    std::vector<Segment2> walls{{{u(rng) - 2, u(rng)}, {u(rng) + 2, u(rng)}}};
    std::vector<Box2> boxes{{{u(rng), u(rng)}, {h(rng), h(rng)}}};
    const auto hyp = hyp_of(walls, boxes);
    const auto r = refine::refine_layout(hyp, traj);
    CHECK(r.final_loss.total <= r.initial.total);
    std::size_t prev = r.initial.total;
    for (const auto& e : r.log) {
      CHECK(e.loss <= prev);
      prev = e.loss;
    }
    for (std::size_t i = 0; i < walls.size(); ++i)
      CHECK(std::abs(direction_angle(r.layout.walls[i].segment) - direction_angle(walls[i])) < 1e-12);
    if (r.converged) {
      const auto again = refine::refine_layout(r.layout, traj);
      REQUIRE(again.log.size() == 1);  // only the start entry
      CHECK(again.log[0].iter == 0);
      CHECK(again.layout.walls[0].segment.a == r.layout.walls[0].segment.a);
      CHECK(again.layout.objects[0].center == r.layout.objects[0].center);
      CHECK(again.layout.objects[0].half_extents == r.layout.objects[0].half_extents);
    }
  }
  RefineConfig bad;
  bad.step = 0;
  CHECK_THROWS_AS(validate(bad), DataError);
}

TEST_CASE("chamfer examples") {
  const std::vector<Segment2> a{{{0, 0}, {2, 0}}, {{2, 0}, {2, 3}}};
  CHECK(metrics::chamfer(a, a) == 0.0);
  const std::vector<Segment2> p{{{0, 0.1}, {2, 0.1}}}, g{{{0, 0}, {2, 0}}};
  CHECK(std::abs(metrics::chamfer(p, g, 0.02) - 0.1) <= 0.02);
  for (double d : {0.01, 0.05, 0.3, 1.0}) {
    std::vector<Segment2> s = a;
    for (auto& w : s) w.a.x += d, w.b.x += d;
    CHECK(metrics::chamfer(s, a) <= d + 1e-12);
  }
  CHECK_THROWS_AS(metrics::chamfer({}, a), DataError);
  CHECK_THROWS_AS(metrics::chamfer(a, {}), DataError);
}

TEST_CASE("f1_at_tolerance examples") {
  const std::vector<Segment2> g{{{0, 0}, {2, 0}}};
  const auto same = metrics::f1_at_tolerance(g, g);
  CHECK(same.f1 == 1.0);
  CHECK(same.chamfer == 0.0);
  // Half coverage; sample spacing divides both lengths so counts are exact.
  const auto half = metrics::f1_at_tolerance({{{0, -1.0}, {0, -2.0}}, {{-1.0, 0}, {-2.0, 0}}},
                                             {{{0, -1.0}, {0, -2.0}}, {{-1.0, 0}, {-2.0, 0}}, {{5, 0}, {6, 0}}, {{8, 0}, {9, 0}}});
  CHECK(half.precision == 1.0);
  CHECK(half.recall == doctest::Approx(0.5));
  CHECK(half.f1 == doctest::Approx(2.0 / 3.0));
  const auto off = metrics::f1_at_tolerance({{{0, 0.2}, {2, 0.2}}}, g, 0.15);
  CHECK(off.f1 == 0.0);
  CHECK_THROWS_AS(metrics::f1_at_tolerance({}, g), DataError);
}

TEST_CASE("iou_dice examples") {
  const Box2 unit{{0.5, 0.5}, {0.5, 0.5}};
  auto m = metrics::iou_dice({unit}, {unit}, 0.01);
  CHECK(m.iou == 1.0);
  CHECK(m.dice == 1.0);
  m = metrics::iou_dice({unit}, {{{5, 5}, {0.5, 0.5}}}, 0.01);
  CHECK(m.iou == 0.0);
  CHECK(m.dice == 0.0);
  m = metrics::iou_dice({unit}, {{{1.0, 0.5}, {0.5, 0.5}}}, 0.01);
  CHECK(m.iou == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(m.dice == doctest::Approx(0.5).epsilon(1e-9));
  m = metrics::iou_dice({}, {}, 0.02);
  CHECK(m.iou == 1.0);
  CHECK(m.dice == 1.0);
  m = metrics::iou_dice({unit}, {}, 0.02);
  CHECK(m.iou == 0.0);
  CHECK(m.dice == 0.0);
}

TEST_CASE("metric properties: symmetry, identity, scale, dice-iou relation") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-3, 3), h(0.1, 1.0);
  for (int i = 0; i < 100; ++i) {
    const Box2 a{{u(rng), u(rng)}, {h(rng), h(rng)}}, b{{u(rng) * 0.3, u(rng) * 0.3}, {h(rng), h(rng)}};
    const auto ab = metrics::iou_dice({a}, {b}, 0.02), ba = metrics::iou_dice({b}, {a}, 0.02);
    CHECK(ab.iou == ba.iou);
    CHECK(std::abs(ab.dice - 2 * ab.iou / (1 + ab.iou)) < 1e-9);
    CHECK(ab.iou <= ab.dice);
  }
  for (int i = 0; i < 20; ++i) {
    std::vector<Segment2> A, B;
    for (int k = 0; k < 3; ++k) {
      A.push_back({{u(rng), u(rng)}, {u(rng), u(rng)}});
      B.push_back({{u(rng), u(rng)}, {u(rng), u(rng)}});
    }
    CHECK(metrics::chamfer(A, B, 0.01) == doctest::Approx(metrics::chamfer(B, A, 0.01)).epsilon(1e-12));
    CHECK(metrics::chamfer(A, A, 0.01) == 0.0);
    CHECK(metrics::f1_at_tolerance(A, A, 0.15, 0.01).f1 == 1.0);
    // Scaling both inputs by s with spacing scaled too gives the same samples, scaled.
    const double s = 2.5;
    auto scale = [&](std::vector<Segment2> v) {
      for (auto& w : v) w.a = s * w.a, w.b = s * w.b;
      return v;
    };
    CHECK(metrics::chamfer(scale(A), scale(B), 0.01 * s) ==
          doctest::Approx(s * metrics::chamfer(A, B, 0.01)).epsilon(1e-9));
    const auto f = metrics::f1_at_tolerance(A, B, 0.3, 0.01), fs = metrics::f1_at_tolerance(scale(A), scale(B), 0.3 * s, 0.01 * s);
    CHECK(fs.f1 == doctest::Approx(f.f1).epsilon(1e-9));
  }
  // Box scaling: a resolution that scales with the scene keeps the masks identical.
  const Box2 a{{0.3, 0.2}, {0.5, 0.4}}, b{{0.6, 0.1}, {0.4, 0.5}};
  const double s = 4.0;
  const auto m1 = metrics::iou_dice({a}, {b}, 0.1);
  const auto m2 = metrics::iou_dice({{s * a.center, s * a.half_extents}}, {{s * b.center, s * b.half_extents}}, 0.1 * s);
  CHECK(m1.iou == doctest::Approx(m2.iou).epsilon(1e-12));
}

TEST_CASE("PointGrid nearest matches brute force") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-4, 4);
  std::vector<Point2> pts;
  for (int i = 0; i < 500; ++i) pts.push_back({u(rng), u(rng)});
  const metrics::PointGrid grid(pts, 0.3);
  for (int i = 0; i < 500; ++i) {
    const Point2 q{u(rng) * 1.5, u(rng) * 1.5};
    double best = 1e300;
    for (auto p : pts) best = std::min(best, distance(p, q));
    CHECK(grid.nearest(q) == doctest::Approx(best).epsilon(1e-12));
  }
  CHECK(std::isinf(metrics::PointGrid({}, 0.1).nearest({0, 0})));
}
