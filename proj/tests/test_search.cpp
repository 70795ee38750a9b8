#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "genvor/families.hpp"
#include "genvor/oracle.hpp"
#include "genvor/rng.hpp"
#include "genvor/search.hpp"

using namespace genvor;

namespace {

MultOffsetFamily random_mo(int n, int d, uint64_t seed, bool unit = false) {
  Rng rng(seed);
  std::vector<MultOffsetSite> s;
  for (int i = 0; i < n; ++i) {
    Point p(d);
    for (int k = 0; k < d; ++k) p[k] = rng.uniform(0.25, 0.75);
    s.push_back({p, unit ? 1.0 : rng.uniform(0.5, 2.0), unit ? 0.0 : rng.uniform(0, 0.05)});
  }
  return MultOffsetFamily(s);
}

Point random_query(Rng& rng, int d, bool outside_too) {
  Point q(d);
  double lo = outside_too ? -0.5 : 0, hi = outside_too ? 1.5 : 1;
  for (int k = 0; k < d; ++k) q[k] = rng.uniform(lo, hi);
  if (!outside_too)
    for (int k = 0; k < d; ++k) q[k] = std::min(q[k], std::nextafter(1.0, 0.0));
  return q;
}

int walk_depth(const SearchTree& t, int u) {
  const auto& n = t.nodes()[u];
  if (n.leaf) return 0;
  int best = walk_depth(t, n.above);
  for (int c : n.below) best = std::max(best, walk_depth(t, c));
  return best + 1;
}

}  // namespace

TEST(SearchParams, DepthAndDelta) {
  auto f = random_mo(256, 2, 1);
  auto p = make_search_params(f, 0.1);
  EXPECT_EQ(p.depth_bound, static_cast<int>(std::ceil(std::log(256.0) / std::log(8.0 / 7.0))) + 2);
  EXPECT_LE(std::pow(1 + p.delta, p.depth_bound), 1 + 0.1 / 4);
  EXPECT_GE(p.log2_N, 10);
  EXPECT_LE(p.log2_N, 200);
}

TEST(Search, SingleFunctionIsLeaf) {
  MultOffsetFamily f({{{0.3, 0.6}, 2, 0.1}});
  auto t = SearchTree::build(f, 0.5, 1);
  ASSERT_EQ(t.nodes().size(), 1u);
  EXPECT_TRUE(t.nodes()[0].leaf);
  Point q{0.9, 0.1};
  auto a = t.query(f, q);
  EXPECT_EQ(a.id, 0);
  EXPECT_DOUBLE_EQ(a.value, f.eval(0, q));
  auto avd = Avd::flatten(t);
  auto regions = avd.regions();
  ASSERT_EQ(regions.size(), 1u);
  EXPECT_EQ(regions[0].outer, root_cell(2));
}

TEST(Search, TwoPointsStructure) {
  MultOffsetFamily f({{{0.3, 0.5}, 1, 0}, {{0.7, 0.5}, 1, 0}});
  auto t = SearchTree::build(f, 0.5, 1);
  EXPECT_FALSE(t.nodes()[0].leaf);
  EXPECT_LE(walk_depth(t, 0), t.params().depth_bound);
}

TEST(Search, CoincidentQueryGivesZero) {
  auto f = random_mo(20, 2, 3, true);
  auto t = SearchTree::build(f, 0.5, 1);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(t.query(f, f.sites()[i].p).value, 0);
}

TEST(Search, ApproximationRatioMultOffset) {
  for (int d : {2, 3}) {
    for (double eps : {0.5, 0.1}) {
      auto f = random_mo(40, d, 10 + d, false);
      auto t = SearchTree::build(f, eps, 7);
      Rng rng(99);
      int bad = 0;
      for (int s = 0; s < 2000; ++s) {
        Point q = random_query(rng, d, s % 4 == 0);
        auto a = t.query(f, q);
        double ex = oracle::exact_min(f, q).value;
        if (!(a.value >= ex * (1 - 1e-9) && a.value <= ex * (1 + eps))) ++bad;
      }
      EXPECT_EQ(bad, 0) << "d=" << d << " eps=" << eps;
      EXPECT_LE(t.stats().depth, t.params().depth_bound);
    }
  }
}

TEST(Search, FlattenMatchesWalk) {
  auto f = random_mo(30, 2, 5, false);
  auto t = SearchTree::build(f, 0.5, 3);
  auto avd = Avd::flatten(t);
  Rng rng(4);
  for (int s = 0; s < 10000; ++s) {
    Point q = random_query(rng, 2, s % 8 == 0);
    EXPECT_EQ(avd.query(f, t, q).id, t.query(f, q).id);
  }
  EXPECT_LE(avd.regions().size(), avd.node_count() * 4);
}
