#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "genvor/deciders.hpp"
#include "genvor/io.hpp"
#include "genvor/search.hpp"

namespace genvor::checks {

struct CheckResult {
  std::string name;
  bool pass = true;
  uint64_t samples = 0;
  uint64_t violations = 0;
  double worst = 0;
  nlohmann::json counterexample;  // first violation, null when none

  void fail(nlohmann::json why);
  nlohmann::json to_json() const;
};

// Yes/No contract of near deciders at random alpha, checked against the exact minimum.
CheckResult near_contract(const DistanceFamily& f, double eps, int samples, uint64_t seed);
// Below/Within/Above contract of interval structures at random [alpha, beta]; pool_cap as in IntervalOptions.
CheckResult interval_contract(const DistanceFamily& f, double eps, int samples, uint64_t seed, int pool_cap);
// exact_ccs(l) refines approx_clustering(1, l), which refines exact_ccs(2l).
CheckResult clustering_sandwich(const DistanceFamily& f, int samples, uint64_t seed);
// value / exact minimum in [1 - 1e-9, 1 + eps]; half the queries fall outside the unit cube.
CheckResult search_ratio(const DistanceFamily& f, const SearchTree& t, double eps, int queries, uint64_t seed);
CheckResult flatten_equivalence(const DistanceFamily& f, const SearchTree& t, const Avd& avd, int queries,
                                uint64_t seed);
// Samples points inside each exported region and checks its candidate answer.
CheckResult region_audit(const DistanceFamily& f, const Avd& avd, double eps, int per_region, int max_regions,
                         uint64_t seed);
// Serialize, reload and serialize again: identical bytes and identical query ids.
CheckResult roundtrip(const Artifact& a, int queries, uint64_t seed);

struct BenchResult {
  int n = 0;
  double build_ms = 0;
  size_t bytes = 0;
  double avg_locates = 0;
  double avg_query_ns = 0;
  double brute_force_ns = 0;
  int max_locates = 0;
};

// Tree-walk queries against the exact scan on the same uniform points in [0,1)^d.
BenchResult bench(const Artifact& a, double build_ms, int queries, uint64_t seed);

struct SelftestOptions {
  std::vector<FamilyKind> families;
  uint64_t seed = 1;
  int budget = 1000;
  bool inject_fault = false;
};

// Deterministic for fixed options: no timings in the report.
nlohmann::json selftest(const SelftestOptions& opt);

nlohmann::json point_json(const Point& p);

}  // namespace genvor::checks
