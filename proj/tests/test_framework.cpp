#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "genvor/families.hpp"
#include "genvor/family.hpp"
#include "genvor/oracle.hpp"
#include "genvor/rng.hpp"

using namespace genvor;

TEST(Framework, Tolerance) {
  EXPECT_DOUBLE_EQ(tol_of(0), 1e-12);
  EXPECT_DOUBLE_EQ(tol_of(1000), 1e-6);
  EXPECT_TRUE(leq_tol(1 + 5e-10, 1));
  EXPECT_FALSE(leq_tol(1 + 5e-9, 1));
}

TEST(Framework, ScanTiesBySmallerId) {
  MultOffsetFamily f({{{0.2, 0.5}, 1, 0}, {{0.8, 0.5}, 1, 0}, {{0.2, 0.5}, 1, 0}});
  std::vector<int> ids{2, 1, 0};
  MinResult r = scan_ids(f, ids, Point{0.2, 0.5});
  EXPECT_EQ(r.id, 0);
  EXPECT_EQ(r.value, 0);
  EXPECT_EQ(scan_all(f, Point{0.5, 0.5}).id, 0);
  EXPECT_EQ(oracle::exact_min(f, Point{0.9, 0.5}).id, 1);
}

TEST(Framework, SeparationHelpers) {
  MultOffsetFamily f({{{0.2, 0.5}, 1, 0}, {{0.6, 0.5}, 1, 0}, {{0.9, 0.5}, 1, 0}});
  EXPECT_DOUBLE_EQ(sep_point(f, 1, Point{0.6, 0.9}), 0.4);
  EXPECT_THROW(sep_point(f, 3, Point{0, 0}), std::invalid_argument);
  std::vector<int> a{0}, b{1, 2};
  EXPECT_NEAR(sep_sets(f, a, b), 0.2, 1e-15);
  EXPECT_THROW(sep_sets(f, std::vector<int>{}, b), std::invalid_argument);
}

TEST(Framework, SublevelCellsCoverTheBall) {
  MultOffsetFamily f({{{0.5, 0.5}, 2, 0.1}});
  double y = 0.3;  // ball of radius 0.1
  auto cells = sublevel_cells(f, 0, y, 0.02);
  ASSERT_FALSE(cells.empty());
  Rng rng(1);
  for (int t = 0; t < 2000; ++t) {
    double th = rng.uniform(0, 6.283185307179586), r = 0.1 * std::sqrt(rng.uniform());
    Point q{0.5 + r * std::cos(th), 0.5 + r * std::sin(th)};
    bool hit = false;
    for (const auto& c : cells) hit = hit || cell_box(c).contains(q);
    EXPECT_TRUE(hit);
  }
  // Every kept cell lies within its diameter of the ball.
  for (const auto& c : cells) {
    Box b = cell_box(c);
    EXPECT_LE(min_dist(Point{0.5, 0.5}, b), 0.1 + 2 * b.half_diagonal() + 1e-12);
  }
  EXPECT_TRUE(sublevel_cells(f, 0, 0.05, 0.02).empty());
}

TEST(Framework, BoxStatusIsConsistentWithCells) {
  MultOffsetFamily f({{{0.4, 0.6}, 1, 0}});
  CanonicalCell inside = cell_of(quantize(Point{0.4, 0.6}), 6);
  EXPECT_EQ(f.box_status(0, 0.2, 8, inside), BoxStatus::All);
  CanonicalCell far = cell_of(quantize(Point{0.95, 0.05}), 4);
  EXPECT_EQ(f.box_status(0, 0.2, 8, far), BoxStatus::None);
  CanonicalCell root = root_cell(2);
  EXPECT_EQ(f.box_status(0, 0.2, 8, root), BoxStatus::Mixed);
}

TEST(Framework, ValidateFamilyPassesForEachFamily) {
  Rng rng(2);
  std::vector<MultOffsetSite> mo;
  std::vector<std::vector<Point>> fn;
  for (int i = 0; i < 12; ++i) {
    Point c{rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7)};
    mo.push_back({c, rng.uniform(0.5, 2), rng.uniform(0, 0.05)});
    fn.push_back({c, c + Point{0.02, 0.01}, c + Point{-0.01, 0.03}});
  }
  for (const auto& p : validate_family(MultOffsetFamily(mo), 200, 3).properties)
    EXPECT_TRUE(p.pass) << p.name << ": " << p.counterexample;
  for (const auto& p : validate_family(FurthestFamily(fn, 0.1), 200, 4).properties)
    EXPECT_TRUE(p.pass) << p.name << ": " << p.counterexample;
  EXPECT_THROW(validate_family(MultOffsetFamily({mo[0]}), 10, 1), std::invalid_argument);
}
