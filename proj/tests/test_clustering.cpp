#include <gtest/gtest.h>

#include <numeric>

#include "genvor/clustering.hpp"
#include "genvor/families.hpp"
#include "genvor/oracle.hpp"
#include "genvor/rng.hpp"

using namespace genvor;

namespace {

MultOffsetFamily line_of_points(std::vector<double> xs) {
  std::vector<MultOffsetSite> s;
  for (double x : xs) s.push_back({{x, 0.5}, 1, 0});
  return MultOffsetFamily(s);
}

std::vector<int> iota_ids(int n) {
  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

}  // namespace

TEST(Partition, CanonicalFormAndRefinement) {
  Partition p{{{3, 1}, {0}, {4, 2}}};
  p.canonicalize();
  EXPECT_EQ(p.parts, (std::vector<std::vector<int>>{{0}, {1, 3}, {2, 4}}));
  EXPECT_EQ(p.ground(), (std::vector<int>{0, 1, 2, 3, 4}));
  Partition s = Partition::singletons(std::vector<int>{0, 1, 2, 3, 4});
  Partition coarse{{{0, 1, 3}, {2, 4}}};
  EXPECT_TRUE(refines(s, p));
  EXPECT_TRUE(refines(p, coarse));
  EXPECT_FALSE(refines(coarse, p));
  RefinementMap m = refinement_map(p, coarse);
  EXPECT_EQ(m.fine_of[0], (std::vector<int>{0, 1}));
  EXPECT_EQ(m.fine_of[1], (std::vector<int>{2}));
  EXPECT_THROW(refinement_map(coarse, p), std::invalid_argument);
}

TEST(Clustering, CollinearPointsSplitAtGaps) {
  // Gaps 0.1, 0.1, 0.3: sep = gap / 2.
  auto f = line_of_points({0.3, 0.4, 0.5, 0.8});
  auto ids = iota_ids(4);
  EXPECT_EQ(approx_clustering(f, ids, 1.0, 0.06).size(), 2u);
  EXPECT_EQ(approx_clustering(f, ids, 1.0, 0.01).size(), 4u);
  EXPECT_EQ(approx_clustering(f, ids, 1.0, 0.2).size(), 1u);
  EXPECT_NEAR(connectivity_level_exact(f, ids), 0.15, 1e-12);
  EXPECT_GE(connectivity_upper_bound(f, ids), 0.15);
}

TEST(Clustering, SandwichedBetweenExactClusterings) {
  Rng rng(12);
  for (int t = 0; t < 10; ++t) {
    std::vector<MultOffsetSite> s;
    for (int i = 0; i < 30; ++i)
      s.push_back({{rng.uniform(0.25, 0.75), rng.uniform(0.25, 0.75)}, rng.uniform(0.5, 2), rng.uniform(0, 0.05)});
    MultOffsetFamily f(s);
    auto ids = iota_ids(30);
    for (double level : {0.005, 0.02, 0.05, 0.1}) {
      Partition mid = approx_clustering(f, ids, 1.0, level);
      EXPECT_TRUE(refines(oracle::exact_ccs(f, ids, level), mid)) << level;
      EXPECT_TRUE(refines(mid, oracle::exact_ccs(f, ids, 2 * level))) << level;
    }
  }
}

TEST(Clustering, AtomsRefineTheOutput) {
  auto f = line_of_points({0.1, 0.2, 0.6, 0.9});
  auto ids = iota_ids(4);
  Partition atoms{{{0}, {1}, {2, 3}}};
  Partition out = approx_clustering(f, ids, 1.0, 0.01, &atoms);
  EXPECT_TRUE(refines(atoms, out));
  EXPECT_EQ(out.size(), 3u);
  ClusterInfo info = approx_clustering_info(f, ids, 1.0, 0.01, &atoms);
  EXPECT_EQ(info.partition, out);
  EXPECT_DOUBLE_EQ(info.cr_bound(), 0.02);
}

TEST(Splitting, ReturnedDistanceSplits) {
  Rng rng(13);
  SplitStats stats;
  for (int t = 0; t < 20; ++t) {
    std::vector<MultOffsetSite> s;
    int n = 8 + static_cast<int>(rng.below(56));
    for (int i = 0; i < n; ++i)
      s.push_back({{rng.uniform(0.25, 0.75), rng.uniform(0.25, 0.75)}, rng.uniform(0.5, 2), rng.uniform(0, 0.05)});
    MultOffsetFamily f(s);
    auto ids = iota_ids(n);
    Partition cur = Partition::singletons(ids);
    double x = splitting_distance(f, ids, cur, 100 + t, &stats);
    EXPECT_TRUE(is_splitting(f, ids, cur, x));
    size_t m = cur.size();
    EXPECT_GE(4 * approx_clustering(f, ids, 1.0, x / 4, &cur).size(), m);
    EXPECT_LE(8 * approx_clustering(f, ids, 1.0, x, &cur).size(), 7 * m);
  }
  EXPECT_EQ(stats.calls, 20u);
  EXPECT_LE(stats.fallbacks, 1u);
}

TEST(Splitting, RejectsSingleCluster) {
  auto f = line_of_points({0.3, 0.4});
  auto ids = iota_ids(2);
  Partition one{{{0, 1}}};
  EXPECT_THROW(splitting_distance(f, ids, one, 1), std::invalid_argument);
}
