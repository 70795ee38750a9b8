#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "genvor/deciders.hpp"
#include "genvor/families.hpp"
#include "genvor/oracle.hpp"
#include "genvor/rng.hpp"

using namespace genvor;

namespace {

MultOffsetFamily random_mo(int n, int d, uint64_t seed) {
  Rng rng(seed);
  std::vector<MultOffsetSite> s;
  for (int i = 0; i < n; ++i) {
    Point p(d);
    for (int k = 0; k < d; ++k) p[k] = rng.uniform(0.25, 0.75);
    s.push_back({p, rng.uniform(0.5, 2.0), rng.uniform(0, 0.05)});
  }
  return MultOffsetFamily(s);
}

std::vector<int> iota_ids(int n) {
  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

Point unit_query(Rng& rng, int d) {
  Point q(d);
  for (int k = 0; k < d; ++k) q[k] = rng.uniform();
  return q;
}

}  // namespace

TEST(NearDecider, ContractOnRandomQueries) {
  for (int d : {2, 3}) {
    auto f = random_mo(20, d, 10 + d);
    auto ids = iota_ids(20);
    Rng rng(3);
    for (double alpha : {0.01, 0.05, 0.2}) {
      for (double eps : {0.5, 0.1}) {
        if (d == 3 && eps < 0.5) continue;  // fine 3D covers are slow and add nothing new here
        NearDecider dec = near_build(f, ids, alpha, eps);
        for (int s = 0; s < 500; ++s) {
          Point q = unit_query(rng, d);
          double sep = oracle::exact_min(f, q).value;
          NearResult r = near_query(f, dec, q);
          if (sep <= alpha) { EXPECT_TRUE(r.yes); }
          if (r.yes) { EXPECT_TRUE(leq_tol(f.eval(r.id, q), (1 + eps) * alpha)); }
          if (!r.yes) { EXPECT_GT(sep, alpha); }
        }
      }
    }
  }
}

TEST(NearDecider, SubsetAndOutsideQueries) {
  auto f = random_mo(10, 2, 4);
  std::vector<int> ids{1, 3, 5};
  NearDecider dec = near_build(f, ids, 0.1, 0.5);
  Rng rng(5);
  for (int s = 0; s < 500; ++s) {
    Point q{rng.uniform(-0.5, 1.5), rng.uniform(-0.5, 1.5)};
    NearResult r = near_query(f, dec, q);
    if (r.yes) { EXPECT_TRUE(r.id == 1 || r.id == 3 || r.id == 5); }
    MinResult m = scan_ids(f, ids, q);
    if (m.value <= 0.1) { EXPECT_TRUE(r.yes); }
  }
}

TEST(Interval, RungsCoverTheRange) {
  int L = interval_rung_count(0.01, 0.5, 0.1);
  EXPECT_LE(interval_rung(0.01, 0.1, 0), 0.01);
  EXPECT_GE(interval_rung(0.01, 0.1, L), 0.5);
  for (int i = 0; i < L; ++i) EXPECT_LT(interval_rung(0.01, 0.1, i), interval_rung(0.01, 0.1, i + 1));
}

TEST(Interval, ExactModeMatchesSequentialScan) {
  // With pooling off, the overlay answers exactly as the first-yes scan over rung deciders.
  auto f = random_mo(12, 2, 6);
  auto ids = iota_ids(12);
  IntervalStructure s = interval_build(f, ids, 0.02, 0.3, 0.5);
  std::vector<NearDecider> rungs;
  for (int i = 0; i <= s.rungs; ++i) rungs.push_back(interval_rung_decider(f, s, i));
  Rng rng(7);
  for (int t = 0; t < 3000; ++t) {
    Point q = unit_query(rng, 2);
    IntervalResult a = interval_query(f, s, q);
    IntervalResult b = interval_sequential(f, s, rungs, q);
    ASSERT_EQ(a.kind, b.kind) << t;
    if (a.kind != IntervalKind::Above) { EXPECT_EQ(a.id, b.id) << t; }
  }
}

TEST(Interval, PooledModeKeepsKindAndImprovesValue) {
  auto f = random_mo(16, 2, 8);
  auto ids = iota_ids(16);
  IntervalOptions opt;
  opt.pool_cap = 8;
  IntervalStructure pooled = interval_build(f, ids, 0.02, 0.3, 0.5, opt);
  IntervalStructure exact = interval_build(f, ids, 0.02, 0.3, 0.5);
  std::vector<NearDecider> rungs;
  for (int i = 0; i <= exact.rungs; ++i) rungs.push_back(interval_rung_decider(f, exact, i));
  Rng rng(9);
  int pooled_answers = 0;
  for (int t = 0; t < 3000; ++t) {
    Point q = unit_query(rng, 2);
    IntervalResult a = interval_query(f, pooled, q);
    IntervalResult b = interval_sequential(f, exact, rungs, q);
    ASSERT_EQ(a.kind, b.kind) << t;
    if (a.kind == IntervalKind::Within) {
      EXPECT_LE(f.eval(a.id, q), f.eval(b.id, q));
      if (a.pool >= 0) {
        ++pooled_answers;
        EXPECT_EQ(a.id, scan_ids(f, pooled.pools[a.pool], q).id);
      }
    }
  }
  EXPECT_GT(pooled_answers, 0);
}

TEST(Interval, ContractWithRefinement) {
  auto f = random_mo(20, 3, 10);
  auto ids = iota_ids(20);
  NearDecider refine = near_build(f, ids, 0.02 / 8, 1);
  IntervalOptions opt;
  opt.refine = &refine;
  opt.pool_cap = 8;
  IntervalStructure s = interval_build(f, ids, 0.02, 0.2, 0.1, opt);
  Rng rng(11);
  for (int t = 0; t < 2000; ++t) {
    Point q = unit_query(rng, 3);
    double sep = oracle::exact_min(f, q).value;
    IntervalResult r = interval_query(f, s, q);
    switch (r.kind) {
      case IntervalKind::Below:
        EXPECT_LT(f.eval(r.id, q), 0.02);
        if (r.near_id >= 0) { EXPECT_TRUE(leq_tol(f.eval(r.near_id, q), 2 * 0.02 / 8)); }
        break;
      case IntervalKind::Within:
        if (sep >= 0.02 && sep <= 0.2) { EXPECT_TRUE(leq_tol(f.eval(r.id, q), 1.1 * sep)); }
        break;
      case IntervalKind::Above:
        EXPECT_GT(sep, 0.2);
        break;
    }
  }
}

TEST(Interval, DecodeRoundTrip) {
  Label l{3, 5, static_cast<int32_t>(IntervalKind::Below)};
  IntervalResult r = interval_decode(l);
  EXPECT_EQ(r.kind, IntervalKind::Below);
  EXPECT_EQ(r.id, 3);
  EXPECT_EQ(r.near_id, 5);
}
