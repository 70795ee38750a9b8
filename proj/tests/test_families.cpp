#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "genvor/families.hpp"
#include "genvor/oracle.hpp"
#include "genvor/rng.hpp"

using namespace genvor;

namespace {

MultOffsetFamily two_sites(Point a, Point b, double wa, double wb, double aa, double ab) {
  return MultOffsetFamily({{a, wa, aa}, {b, wb, ab}});
}

std::vector<Point> square(double h) { return {{-h, -h}, {h, -h}, {h, h}, {-h, h}}; }

std::vector<Point> star(int spikes, double outer, double inner, Point c = {0, 0}) {
  std::vector<Point> v;
  for (int i = 0; i < 2 * spikes; ++i) {
    double t = std::numbers::pi * i / spikes;
    double r = i % 2 == 0 ? outer : inner;
    v.push_back(Point{c[0] + r * std::cos(t), c[1] + r * std::sin(t)});
  }
  return v;
}

}  // namespace

TEST(MultOffset, PairwiseSepClosedForm) {
  EXPECT_NEAR(mo_pairwise_sep({{0, 0}, 1, 0}, {{0.4, 0}, 1, 0}), 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(mo_pairwise_sep({{0.5, 0.5}, 1, 0.3}, {{0.5, 0.5}, 1, 0.1}), 0.3);
  EXPECT_NEAR(mo_pairwise_sep({{0, 0}, 1, 0}, {{0.3, 0}, 3, 0.1}), 0.25, 1e-15);
}

TEST(MultOffset, PairwiseSepMatchesCoverBisection) {
  Rng rng(7);
  for (int t = 0; t < 40; ++t) {
    Point a{rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8)};
    Point b{rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8)};
    auto f = two_sites(a, b, rng.uniform(0.5, 2), rng.uniform(0.5, 2), rng.uniform(0, 0.1), rng.uniform(0, 0.1));
    double tol = 1e-6;
    double ref = oracle::bisect_sep(f, 0, 1, tol);
    EXPECT_NEAR(f.pairwise_sep(0, 1), ref, 4 * tol) << "trial " << t;
  }
}

TEST(MultOffset, ContainmentThresholdIsExact) {
  Rng rng(11);
  for (int t = 0; t < 1000; ++t) {
    MultOffsetSite si{{rng.uniform(), rng.uniform()}, rng.uniform(0.5, 1.0), rng.uniform(0, 0.2)};
    MultOffsetSite sj{{rng.uniform(), rng.uniform()}, rng.uniform(1.0, 2.0), rng.uniform(0, 0.2)};
    double delta = rng.uniform(0.1, 1.0);
    double y = mo_containment_threshold(si, sj, delta);
    if (!(y > sj.a && y > si.a / (1 + delta))) continue;
    EXPECT_TRUE(mo_ball_contained(si, sj, y * (1 + 1e-6), delta));
    EXPECT_FALSE(mo_ball_contained(si, sj, y * (1 - 1e-6), delta));
  }
}

TEST(MultOffset, SketchPicksLightestSite) {
  MultOffsetFamily f({{{0.1, 0.1}, 2, 0}, {{0.3, 0.1}, 1, 0}, {{0.2, 0.4}, 1, 0}});
  int one[] = {2};
  auto s1 = f.sketch(one, 0.5, 0.3);
  EXPECT_EQ(s1.members, std::vector<int>{2});
  EXPECT_EQ(s1.y0, 0);
  int two[] = {0, 1};
  auto s2 = f.sketch(two, 0.5, 0.2);
  EXPECT_EQ(s2.members, std::vector<int>{1});
  EXPECT_NEAR(s2.y0, 2.4, 1e-12);
  int all[] = {0, 1, 2};
  double cr = oracle::exact_cr(f, all);
  auto s3 = f.sketch(all, 0.5, cr);
  EXPECT_EQ(s3.members, std::vector<int>{1});
  for (double y : {s3.y0, 2 * s3.y0, 10 * s3.y0})
    for (int j : all) EXPECT_TRUE(mo_ball_contained(f.sites()[1], f.sites()[j], y, 0.5));
}

TEST(MultOffset, FineStatusAgreesWithEnumeration) {
  Rng rng(3);
  MultOffsetFamily f({{{0.37, 0.61}, 1.3, 0.05}});
  for (int t = 0; t < 300; ++t) {
    int ql = static_cast<int>(rng.below(4));
    CanonicalCell q = root_cell(2);
    for (int l = 0; l < ql; ++l) q = child_cell(q, static_cast<uint32_t>(rng.below(4)));
    int k = ql + 1 + static_cast<int>(rng.below(3));
    double y = rng.uniform(0.05, 0.6);
    int kept = 0, total = 0;
    std::vector<CanonicalCell> stack{q};
    while (!stack.empty()) {
      CanonicalCell c = stack.back();
      stack.pop_back();
      if (c.level == k) {
        ++total;
        kept += f.cell_keep(0, y, cell_box(c));
        continue;
      }
      for (uint32_t j = 0; j < 4; ++j) stack.push_back(child_cell(c, j));
    }
    BoxStatus st = f.fine_status(0, y, k, q);
    BoxStatus truth = kept == 0 ? BoxStatus::None : (kept == total ? BoxStatus::All : BoxStatus::Mixed);
    EXPECT_EQ(st, truth);
  }
}

TEST(MultOffset, RejectsInvalidSites) {
  EXPECT_THROW(MultOffsetFamily({{{0.1, 0.1}, 0, 0}}), std::invalid_argument);
  EXPECT_THROW(MultOffsetFamily({{{0.1, 0.1}, 1, -1}}), std::invalid_argument);
  EXPECT_THROW(MultOffsetFamily({}), std::invalid_argument);
  EXPECT_THROW(MultOffsetFamily({{{0.1, 0.1}, 1, 0}, {{0.1, 0.1, 0.1}, 1, 0}}), std::invalid_argument);
}

TEST(MultOffset, FamilyPropertiesHold) {
  Rng rng(5);
  std::vector<MultOffsetSite> s;
  for (int i = 0; i < 12; ++i)
    s.push_back({{rng.uniform(0.25, 0.75), rng.uniform(0.25, 0.75)}, rng.uniform(0.5, 2), rng.uniform(0, 0.05)});
  MultOffsetFamily f(s);
  auto rep = validate_family(f, 200, 9);
  for (const auto& p : rep.properties) EXPECT_TRUE(p.pass) << p.name << ": " << p.counterexample;
}

TEST(Scaling, ScaleDistanceExamples) {
  auto sq = make_fat_body({0, 0}, square(1));
  EXPECT_DOUBLE_EQ(scale_distance(sq, {2, 0}), 2);
  EXPECT_EQ(scale_distance(sq, {0, 0}), 0);
  auto tri = make_fat_body({0.25, 0.25}, {{0, 0}, {1, 0}, {0, 1}});
  Rng rng(1);
  for (int t = 0; t < 1000; ++t) {
    Point q{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    double ref = oracle::scale_distance_bisect(tri, q);
    EXPECT_NEAR(scale_distance(tri, q), ref, 1e-9 * std::max(1.0, ref));
  }
}

TEST(Scaling, FatCheckExamples) {
  auto sq = fat_check(make_fat_body({0, 0}, square(1)));
  EXPECT_TRUE(sq.ok);
  EXPECT_DOUBLE_EQ(sq.r, 1);
  EXPECT_NEAR(sq.alpha, std::sqrt(2.0), 1e-15);
  std::vector<Point> hex;
  for (int i = 0; i < 6; ++i) hex.push_back(Point{std::cos(i * std::numbers::pi / 3), std::sin(i * std::numbers::pi / 3)});
  auto hx = fat_check(make_fat_body({0, 0}, hex));
  EXPECT_TRUE(hx.ok);
  EXPECT_NEAR(hx.r, std::sqrt(3.0) / 2, 1e-12);
  EXPECT_NEAR(hx.alpha, 2 / std::sqrt(3.0), 1e-12);
}

TEST(Scaling, SpikyStarIsRejected) {
  auto body = make_fat_body({0, 0}, star(5, 1.0, 0.2), false);
  auto fc = fat_check(body);
  EXPECT_FALSE(fc.ok);
  EXPECT_NEAR(norm(fc.violation), 1.0, 0.3);
  EXPECT_THROW(make_fat_body({0, 0}, star(5, 1.0, 0.2)), BodyRejected);
}

TEST(Scaling, MildStarIsAccepted) {
  auto body = make_fat_body({0, 0}, star(6, 1.0, 0.95), false);
  EXPECT_TRUE(fat_check(body).ok);
}

TEST(Scaling, RejectsNonStarShaped) {
  // Polygon turning back on itself about the center.
  std::vector<Point> bad{{1, 0}, {0, 1}, {-1, 0}, {0.5, 0.2}, {0, -1}};
  EXPECT_THROW(make_fat_body({0, 0}, bad), BodyRejected);
}

TEST(Scaling, PairwiseSepMatchesIntersectionBisection) {
  Rng rng(21);
  for (int t = 0; t < 30; ++t) {
    std::vector<FatBody2D> b;
    for (int i = 0; i < 2; ++i) {
      Point c{rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7)};
      b.push_back(make_fat_body(c, ellipse_polygon(c, rng.uniform(0.02, 0.1), rng.uniform(0.02, 0.1), rng.uniform(0, 3))));
    }
    ScalingFamily f(b);
    double sep = f.pairwise_sep(0, 1);
    EXPECT_TRUE(bodies_meet(f.bodies()[0], f.bodies()[1], sep * (1 + 1e-9)));
    EXPECT_FALSE(bodies_meet(f.bodies()[0], f.bodies()[1], sep * (1 - 1e-9)));
  }
  // Non-convex pair goes through bisection.
  std::vector<Point> sq;
  for (auto p : square(0.05)) sq.push_back(p + Point{0.7, 0.5});
  std::vector<FatBody2D> b{make_fat_body({0.3, 0.5}, star(6, 0.1, 0.095, {0.3, 0.5})), make_fat_body({0.7, 0.5}, sq)};
  ScalingFamily f(b);
  double sep = f.pairwise_sep(0, 1);
  EXPECT_TRUE(bodies_meet(b[0], b[1], sep * (1 + 1e-9)));
  EXPECT_FALSE(bodies_meet(b[0], b[1], sep * (1 - 1e-6)));
}

TEST(Scaling, BodyMeetsBoxMatchesSampling) {
  auto body = make_fat_body({0.5, 0.5}, star(6, 0.2, 0.19, {0.5, 0.5}));
  Rng rng(4);
  for (int t = 0; t < 500; ++t) {
    double s = rng.uniform(0.01, 0.1);
    Point lo{rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8)};
    Box bx{lo, lo + Point{s, s}};
    double y = rng.uniform(0.3, 1.5);
    bool hit = false;
    for (int i = 0; i <= 40 && !hit; ++i)
      for (int j = 0; j <= 40 && !hit; ++j)
        hit = scale_distance(body, lo + Point{s * i / 40, s * j / 40}) <= y;
    if (hit) { EXPECT_TRUE(body_meets_box(body, y, bx)); }
  }
}

TEST(Scaling, SketchCoversIdenticalTranslates) {
  std::vector<FatBody2D> b;
  for (int i = 0; i < 5; ++i) {
    Point c{0.5 + 0.001 * i, 0.5};
    b.push_back(make_fat_body(c, ellipse_polygon(c, 0.05, 0.03, 0.4)));
  }
  ScalingFamily f(b);
  std::vector<int> ids{0, 1, 2, 3, 4};
  double cr = oracle::exact_cr(f, ids);
  auto s = f.sketch(ids, 0.5, cr);
  EXPECT_EQ(s.members.size(), 1u);
  Rng rng(2);
  for (double y : {s.y0, 2 * s.y0, 5 * s.y0})
    for (int j : ids)
      for (int t = 0; t < 200; ++t) {
        double th = rng.uniform(0, 2 * std::numbers::pi);
        const auto& bj = f.bodies()[j];
        Point dir{std::cos(th), std::sin(th)};
        double reach = y / scale_distance(bj, bj.center + dir);
        Point p = bj.center + reach * dir;
        EXPECT_LE(f.eval(s.members[0], p), (1 + 0.5) * y * (1 + 1e-9));
      }
  int one[] = {3};
  EXPECT_EQ(f.sketch(one, 0.5, 0).y0, 0);
}

TEST(Scaling, SketchSizeShrinksWithDelta) {
  Rng rng(8);
  std::vector<FatBody2D> b;
  for (int i = 0; i < 60; ++i) {
    Point c{rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7)};
    b.push_back(make_fat_body(c, ellipse_polygon(c, rng.uniform(0.02, 0.05), rng.uniform(0.02, 0.05), rng.uniform(0, 3))));
  }
  ScalingFamily f(b);
  std::vector<int> ids(60);
  for (int i = 0; i < 60; ++i) ids[i] = i;
  for (double delta : {1.0, 0.5, 0.25, 0.1}) {
    auto s = f.sketch(ids, delta, 0.1);
    EXPECT_GE(s.members.size(), 1u);
    EXPECT_LE(static_cast<double>(s.members.size()), 64.0 / (delta * delta)) << "delta " << delta;
  }
}

TEST(Scaling, FamilyPropertiesHold) {
  Rng rng(6);
  std::vector<FatBody2D> b;
  for (int i = 0; i < 8; ++i) {
    Point c{rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7)};
    b.push_back(make_fat_body(c, ellipse_polygon(c, rng.uniform(0.02, 0.05), rng.uniform(0.02, 0.05), rng.uniform(0, 3))));
  }
  ScalingFamily f(b);
  auto rep = validate_family(f, 120, 4);
  for (const auto& p : rep.properties) EXPECT_TRUE(p.pass) << p.name << ": " << p.counterexample;
}

TEST(Scaling, SpikyBodyFailsGrowthAudit) {
  std::vector<FatBody2D> b{make_fat_body({0.5, 0.5}, star(5, 0.2, 0.02, {0.5, 0.5}), false),
                           make_fat_body({0.3, 0.3}, star(5, 0.2, 0.02, {0.3, 0.3}), false)};
  ScalingFamily f(b);
  auto rep = validate_family(f, 400, 4);
  bool growth_ok = true;
  for (const auto& p : rep.properties)
    if (p.name == "bounded_growth") growth_ok = p.pass;
  EXPECT_FALSE(growth_ok);
}

TEST(Scaling, ConnectivityLowerBound) {
  Rng rng(12);
  for (int t = 0; t < 10; ++t) {
    std::vector<FatBody2D> b;
    int n = 6;
    for (int i = 0; i < n; ++i) {
      Point c{rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7)};
      b.push_back(make_fat_body(c, ellipse_polygon(c, 0.04, 0.03, rng.uniform(0, 3))));
    }
    ScalingFamily f(b);
    std::vector<int> ids(n);
    for (int i = 0; i < n; ++i) ids[i] = i;
    double diam = 0, amax = 0, rmax = 0;
    for (int i = 0; i < n; ++i) {
      amax = std::max(amax, b[i].alpha);
      rmax = std::max(rmax, b[i].r);
      for (int j = 0; j < n; ++j) diam = std::max(diam, dist(b[i].center, b[j].center));
    }
    EXPECT_GE(oracle::exact_cr(f, ids), diam / (2 * n * amax * rmax));
  }
}

TEST(Furthest, DistanceExamples) {
  FurthestFamily f({{{0, 0}, {1, 0}}}, 0.1);
  EXPECT_DOUBLE_EQ(f.eval(0, {0.5, 0}), 0.5);
  EXPECT_DOUBLE_EQ(f.eval(0, {0, 0}), 1);
}

TEST(Furthest, ReducedSetWithinTolerance) {
  Rng rng(15);
  std::vector<Point> pts;
  for (int i = 0; i < 1000; ++i) pts.push_back(Point{rng.normal(), rng.normal()});
  double eps = 0.2;
  UncertainSet u = make_uncertain_set(pts, eps);
  EXPECT_LT(u.reduced.size(), pts.size());
  for (int t = 0; t < 300; ++t) {
    Point q{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    double exact = 0;
    for (const auto& p : pts) exact = std::max(exact, dist(p, q));
    double red = fn_distance(u, q);
    EXPECT_LE(red, exact * (1 + 1e-12));
    EXPECT_LE(exact, (1 + eps / 4) * red);
  }
}

TEST(Furthest, PairwiseSepExamples) {
  FurthestFamily f({{{0, 0}}, {{1, 0}}}, 0.1);
  EXPECT_NEAR(f.pairwise_sep(0, 1), 0.5, 1e-12);
  double h = std::sqrt(3.0) / 2;
  FurthestFamily g({{{0, 0}}, {{1, 0}, {0.5, h}}}, 0.1);
  EXPECT_NEAR(g.pairwise_sep(0, 1), 1 / std::sqrt(3.0), 1e-9);
}

TEST(Furthest, PairwiseSepMatchesExactBall) {
  Rng rng(16);
  double mu = 0.01 * 0.01 / 144;
  for (int t = 0; t < 50; ++t) {
    std::vector<Point> a, b, all;
    for (int i = 0; i < 20; ++i) a.push_back(Point{rng.uniform(), rng.uniform(), rng.uniform()});
    for (int i = 0; i < 20; ++i) b.push_back(Point{rng.uniform(), rng.uniform(), rng.uniform()});
    FurthestFamily f({a, b}, 0.01);
    for (const auto& p : f.sets()[0].reduced) all.push_back(p);
    for (const auto& p : f.sets()[1].reduced) all.push_back(p);
    double ref = oracle::exact_meb(all).radius;
    double got = f.pairwise_sep(0, 1);
    EXPECT_GE(got, ref * (1 - 1e-9));
    EXPECT_LE(got, ref * (1 + 2 * mu));
  }
}

TEST(Furthest, MebCoresetBounds) {
  auto one = meb_coreset(std::vector<Point>{{0.3, 0.4}}, 0.1);
  EXPECT_EQ(one.radius, 0);
  EXPECT_EQ(one.center, (Point{0.3, 0.4}));
  auto two = meb_coreset(std::vector<Point>{{0, 0}, {1, 0}}, 0.1);
  EXPECT_NEAR(two.center[0], 0.5, 1e-12);
  EXPECT_LE(two.radius, 0.5 * 1.1);
  Rng rng(17);
  for (double mu : {0.1, 0.01}) {
    for (int t = 0; t < 20; ++t) {
      std::vector<Point> pts;
      for (int i = 0; i < 64; ++i) pts.push_back(Point{rng.normal(), rng.normal(), rng.normal()});
      auto m = meb_coreset(pts, mu);
      double exact = oracle::exact_meb(pts).radius;
      EXPECT_LE(m.radius, (1 + mu) * exact * (1 + 1e-12));
      EXPECT_LE(m.coreset.size(), static_cast<size_t>(std::ceil(2 / mu)) + 1);
      for (const auto& p : pts) EXPECT_LE(dist(p, m.center), m.radius * (1 + 1e-12));
    }
  }
}

TEST(Furthest, BallIntersectionBound) {
  // Every q in the intersection of balls(p_i, (1+d)z) sits between dz and sqrt(4d+2d^2)z from the center.
  Rng rng(18);
  for (double delta : {0.05, 0.1}) {
    for (int t = 0; t < 10; ++t) {
      std::vector<Point> pts;
      for (int i = 0; i < 32; ++i) pts.push_back(Point{rng.normal(), rng.normal()});
      Ball m = oracle::exact_meb(pts);
      double z = m.radius;
      int found = 0;
      for (int s = 0; s < 20000 && found < 50; ++s) {
        double rr = std::sqrt(4 * delta + 2 * delta * delta) * z * 1.5;
        Point q = m.center + Point{rng.uniform(-rr, rr), rng.uniform(-rr, rr)};
        bool in = true;
        for (const auto& p : pts) in = in && dist(p, q) <= (1 + delta) * z;
        if (!in) continue;
        ++found;
        EXPECT_LE(dist(q, m.center), std::sqrt(4 * delta + 2 * delta * delta) * z * (1 + 1e-12));
      }
      EXPECT_GT(found, 0);
    }
  }
}

TEST(Furthest, SketchFormula) {
  FurthestFamily f({{{0, 0}}, {{0.1, 0}}, {{0.2, 0}}}, 0.1);
  int one[] = {1};
  EXPECT_EQ(f.sketch(one, 0.5, 0.1).y0, 0);
  int all[] = {2, 0, 1};
  auto s = f.sketch(all, 0.5, 0.1);
  EXPECT_EQ(s.members, std::vector<int>{0});
  EXPECT_NEAR(s.y0, 2.4, 1e-12);
}

TEST(Furthest, SketchContainmentAudit) {
  Rng rng(19);
  std::vector<std::vector<Point>> sets;
  for (int i = 0; i < 4; ++i) {
    Point c{rng.uniform(0.4, 0.6), rng.uniform(0.4, 0.6)};
    std::vector<Point> s;
    for (int j = 0; j < 5; ++j) s.push_back(c + Point{rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02)});
    sets.push_back(s);
  }
  FurthestFamily f(sets, 0.1);
  std::vector<int> ids{0, 1, 2, 3};
  double cr = oracle::exact_cr(f, ids);
  auto sk = f.sketch(ids, 0.5, cr);
  for (double y : {sk.y0, 3 * sk.y0})
    for (int j : ids)
      for (int t = 0; t < 1000; ++t) {
        // Boundary points of sublevel(F_j, y): walk along a random ray from the ball center.
        Point c = f.sets()[j].meb_center;
        double th = rng.uniform(0, 2 * std::numbers::pi);
        Point dir{std::cos(th), std::sin(th)};
        double lo = 0, hi = 2 * y + 1;
        for (int it = 0; it < 80; ++it) {
          double mid = 0.5 * (lo + hi);
          (f.eval(j, c + mid * dir) <= y ? lo : hi) = mid;
        }
        EXPECT_LE(f.eval(sk.members[0], c + lo * dir), 1.5 * y);
      }
}

TEST(Furthest, FamilyPropertiesHold) {
  Rng rng(20);
  std::vector<std::vector<Point>> sets;
  for (int i = 0; i < 8; ++i) {
    Point c{rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7)};
    std::vector<Point> s;
    for (int j = 0; j < 6; ++j) s.push_back(c + Point{rng.uniform(-0.03, 0.03), rng.uniform(-0.03, 0.03)});
    sets.push_back(s);
  }
  FurthestFamily f(sets, 0.25);
  auto rep = validate_family(f, 120, 2);
  for (const auto& p : rep.properties) EXPECT_TRUE(p.pass) << p.name << ": " << p.counterexample;
}
