#include "genvor/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "genvor/instances.hpp"
#include "genvor/oracle.hpp"

namespace genvor::checks {

using nlohmann::json;

json point_json(const Point& p) {
  json a = json::array();
  for (int k = 0; k < p.d; ++k) a.push_back(p[k]);
  return a;
}

void CheckResult::fail(json why) {
  pass = false;
  if (violations++ == 0) counterexample = std::move(why);
}

json CheckResult::to_json() const {
  json j{{"name", name}, {"pass", pass}, {"samples", samples}, {"violations", violations}};
  if (worst != 0) j["worst"] = worst;
  if (!counterexample.is_null()) j["counterexample"] = counterexample;
  return j;
}

namespace {

std::vector<int> all_ids(const DistanceFamily& f) {
  std::vector<int> ids(f.size());
  for (int i = 0; i < f.size(); ++i) ids[i] = i;
  return ids;
}

double log_uniform(Rng& rng, double lo, double hi) { return lo * std::pow(hi / lo, rng.uniform()); }

}  // namespace

CheckResult near_contract(const DistanceFamily& f, double eps, int samples, uint64_t seed) {
  CheckResult r{"near_contract"};
  Rng rng(seed);
  auto ids = all_ids(f);
  const int per = 100;
  for (int done = 0; done < samples;) {
    double alpha = log_uniform(rng, 1e-3, 0.5);
    NearDecider dec = near_build(f, ids, alpha, eps);
    for (int s = 0; s < per && done < samples; ++s, ++done) {
      Point q = random_query(rng, f.dim(), s % 4 == 0);
      ++r.samples;
      double sep = oracle::exact_min(f, q).value;
      NearResult a = near_query(f, dec, q);
      json ce{{"alpha", alpha}, {"eps", eps}, {"q", point_json(q)}, {"sep", sep}, {"yes", a.yes}, {"id", a.id}};
      if (a.yes && !leq_tol(f.eval(a.id, q), (1 + eps) * alpha)) r.fail(ce);
      else if (!a.yes && sep <= alpha) r.fail(ce);
      else if (a.yes && sep > (1 + eps) * alpha + tol_of(alpha)) r.fail(ce);
    }
  }
  return r;
}

CheckResult interval_contract(const DistanceFamily& f, double eps, int samples, uint64_t seed, int pool_cap) {
  CheckResult r{pool_cap > 0 ? "interval_contract_pooled" : "interval_contract"};
  Rng rng(seed);
  auto ids = all_ids(f);
  const int per = 200;
  for (int done = 0; done < samples;) {
    double alpha = log_uniform(rng, 1e-3, 0.2);
    double beta = alpha * log_uniform(rng, 1, 100);
    IntervalOptions opt;
    opt.pool_cap = pool_cap;
    IntervalStructure s = interval_build(f, ids, alpha, beta, eps, opt);
    for (int k = 0; k < per && done < samples; ++k, ++done) {
      Point q = random_query(rng, f.dim(), k % 4 == 0);
      ++r.samples;
      double sep = oracle::exact_min(f, q).value;
      IntervalResult a = interval_query(f, s, q);
      json ce{{"alpha", alpha}, {"beta", beta}, {"eps", eps}, {"q", point_json(q)}, {"sep", sep},
              {"kind", static_cast<int>(a.kind)}, {"id", a.id}};
      switch (a.kind) {
        case IntervalKind::Below:
          if (!(f.eval(a.id, q) < alpha)) r.fail(ce);
          break;
        case IntervalKind::Within:
          if (a.id < 0) r.fail(ce);
          else if (sep >= alpha && sep <= beta) {
            double ratio = sep > 0 ? f.eval(a.id, q) / sep : 1;
            r.worst = std::max(r.worst, ratio);
            if (!leq_tol(f.eval(a.id, q), (1 + eps) * sep)) r.fail(ce);
          }
          break;
        case IntervalKind::Above:
          if (!(sep > beta)) r.fail(ce);
          break;
      }
    }
  }
  return r;
}

CheckResult clustering_sandwich(const DistanceFamily& f, int samples, uint64_t seed) {
  CheckResult r{"clustering_sandwich"};
  Rng rng(seed);
  auto ids = all_ids(f);
  double cr = oracle::exact_cr(f, ids);
  if (!(cr > 0)) cr = 0.1;
  for (int s = 0; s < samples; ++s) {
    double level = log_uniform(rng, cr / 64, 2 * cr);
    ++r.samples;
    Partition lo = oracle::exact_ccs(f, ids, level);
    Partition mid = approx_clustering(f, ids, 1.0, level);
    Partition hi = oracle::exact_ccs(f, ids, 2 * level);
    if (!refines(lo, mid) || !refines(mid, hi))
      r.fail(json{{"level", level}, {"exact_low", lo.size()}, {"approx", mid.size()}, {"exact_high", hi.size()}});
  }
  return r;
}

CheckResult search_ratio(const DistanceFamily& f, const SearchTree& t, double eps, int queries, uint64_t seed) {
  CheckResult r{"search_ratio"};
  Rng rng(seed);
  r.worst = 1;
  for (int i = 0; i < queries; ++i) {
    Point q = random_query(rng, f.dim(), i % 2 == 1);
    ++r.samples;
    QueryAnswer a = t.query(f, q);
    MinResult e = oracle::exact_min(f, q);
    bool ok = a.id >= 0 && a.value == f.eval(a.id, q);
    double ratio = 1;
    if (e.value > 0) ratio = a.value / e.value;
    else if (a.value > 0) ratio = INFINITY;
    r.worst = std::max(r.worst, ratio);
    ok = ok && ratio >= 1 - 1e-9 && ratio <= 1 + eps;
    if (!ok)
      r.fail(json{{"q", point_json(q)}, {"id", a.id}, {"value", a.value}, {"exact_id", e.id}, {"exact", e.value},
                  {"ratio", ratio}, {"eps", eps}});
  }
  return r;
}

CheckResult flatten_equivalence(const DistanceFamily& f, const SearchTree& t, const Avd& avd, int queries,
                                uint64_t seed) {
  CheckResult r{"flatten_equivalence"};
  Rng rng(seed);
  for (int i = 0; i < queries; ++i) {
    Point q = random_query(rng, f.dim(), i % 8 == 7);
    ++r.samples;
    int a = t.query(f, q).id, b = avd.query(f, t, q).id;
    if (a != b) r.fail(json{{"q", point_json(q)}, {"walk", a}, {"flat", b}});
  }
  return r;
}

CheckResult region_audit(const DistanceFamily& f, const Avd& avd, double eps, int per_region, int max_regions,
                         uint64_t seed) {
  CheckResult r{"region_audit"};
  Rng rng(seed);
  r.worst = 1;
  auto regions = avd.regions();
  // Deterministic subsample when the diagram is large.
  size_t stride = max_regions > 0 && regions.size() > static_cast<size_t>(max_regions)
                      ? (regions.size() + max_regions - 1) / max_regions
                      : 1;
  for (size_t i = 0; i < regions.size(); i += stride) {
    const AvdRegion& reg = regions[i];
    Box outer = cell_box(reg.outer);
    Box inner = reg.has_inner ? cell_box(reg.inner) : Box{};
    for (int s = 0; s < per_region; ++s) {
      Point q(f.dim());
      bool found = false;
      for (int tries = 0; tries < 64 && !found; ++tries) {
        for (int k = 0; k < f.dim(); ++k) q[k] = rng.uniform(outer.lo[k], outer.hi[k]);
        found = !reg.has_inner || !inner.contains(q);
        // Half-open cells: the upper faces belong to neighbours.
        for (int k = 0; k < f.dim() && found; ++k) found = q[k] < outer.hi[k];
      }
      if (!found) continue;
      ++r.samples;
      MinResult got = scan_ids(f, avd.sketches()[reg.sketch], q);
      MinResult e = oracle::exact_min(f, q);
      double ratio = e.value > 0 ? got.value / e.value : (got.value > 0 ? INFINITY : 1);
      r.worst = std::max(r.worst, ratio);
      if (!(ratio <= 1 + eps))
        r.fail(json{{"region", i}, {"q", point_json(q)}, {"id", got.id}, {"value", got.value}, {"exact", e.value}});
    }
  }
  return r;
}

CheckResult roundtrip(const Artifact& a, int queries, uint64_t seed) {
  CheckResult r{"roundtrip"};
  auto bytes = a.serialize();
  Artifact b = Artifact::deserialize(bytes);
  ++r.samples;
  if (b.serialize() != bytes) r.fail(json{{"reason", "re-serialized bytes differ"}, {"size", bytes.size()}});
  Rng rng(seed);
  for (int i = 0; i < queries; ++i) {
    Point q = random_query(rng, a.instance.dim, i % 4 == 3);
    ++r.samples;
    auto x = a.tree.query(*a.family, q), y = b.tree.query(*b.family, q);
    auto z = b.avd.query(*b.family, b.tree, q);
    if (x.id != y.id || x.value != y.value || z.id != x.id)
      r.fail(json{{"q", point_json(q)}, {"before", x.id}, {"after", y.id}, {"flat_after", z.id}});
  }
  return r;
}

BenchResult bench(const Artifact& a, double build_ms, int queries, uint64_t seed) {
  const DistanceFamily& f = *a.family;
  BenchResult b;
  b.n = f.size();
  b.build_ms = build_ms;
  b.bytes = a.serialize().size();
  Rng rng(seed);
  std::vector<Point> qs;
  for (int i = 0; i < queries; ++i) qs.push_back(random_query(rng, f.dim(), false));
  uint64_t locates = 0;
  volatile int sink = 0;
  auto t0 = std::chrono::steady_clock::now();
  for (const Point& q : qs) {
    QueryAnswer r = a.tree.query(f, q);
    locates += r.locates;
    b.max_locates = std::max(b.max_locates, r.locates);
    sink = sink + r.id;
  }
  auto t1 = std::chrono::steady_clock::now();
  for (const Point& q : qs) sink = sink + scan_all(f, q).id;
  auto t2 = std::chrono::steady_clock::now();
  b.avg_locates = static_cast<double>(locates) / queries;
  b.avg_query_ns = std::chrono::duration<double, std::nano>(t1 - t0).count() / queries;
  b.brute_force_ns = std::chrono::duration<double, std::nano>(t2 - t1).count() / queries;
  return b;
}

// ---------------------------------------------------------------- selftest

namespace {

json validate_json(const DistanceFamily& f, int budget, uint64_t seed, bool& pass) {
  json out = json::array();
  FamilyReport rep = validate_family(f, budget, seed);
  for (const auto& p : rep.properties) {
    json j{{"name", "property_" + p.name}, {"pass", p.pass}, {"samples", p.samples}};
    if (!p.pass) j["counterexample"] = p.counterexample, pass = false;
    out.push_back(j);
  }
  return out;
}

}  // namespace

json selftest(const SelftestOptions& opt) {
  json report{{"seed", opt.seed}, {"budget", opt.budget}, {"inject_fault", opt.inject_fault}};
  json fams = json::array();
  bool all = true;
  for (FamilyKind k : opt.families) {
    uint64_t seed = opt.seed * 1000003 + static_cast<uint64_t>(k);
    std::vector<int> dims = k == FamilyKind::Scaling2D ? std::vector<int>{2} : std::vector<int>{2, 3};
    for (int d : dims) {
      json fj{{"family", family_tag(k)}, {"dim", d}};
      json list = json::array();
      bool pass = true;
      int n = d == 2 ? 24 : 16;
      double eps = 0.1;
      Instance inst = random_instance(k, n, d, eps, seed + d);
      Artifact a;
      BuildHooks hooks;
      if (opt.inject_fault) hooks.eps_scale = 32, hooks.pool_cap = 0;
      a = Artifact::build(inst, hooks);
      const DistanceFamily& f = *a.family;
      for (auto& j : validate_json(f, opt.budget, seed, pass)) list.push_back(j);
      std::vector<CheckResult> rs;
      rs.push_back(near_contract(f, 0.5, opt.budget, seed + 1));
      rs.push_back(interval_contract(f, 0.5, opt.budget, seed + 2, 0));
      rs.push_back(interval_contract(f, 0.5, opt.budget, seed + 3, 8));
      rs.push_back(clustering_sandwich(f, std::max(1, opt.budget / 10), seed + 4));
      rs.push_back(search_ratio(f, a.tree, eps, opt.budget, seed + 5));
      rs.push_back(flatten_equivalence(f, a.tree, a.avd, opt.budget, seed + 6));
      rs.push_back(region_audit(f, a.avd, eps, 4, std::max(1, opt.budget / 4), seed + 7));
      rs.push_back(roundtrip(a, std::max(1, opt.budget / 10), seed + 8));
      for (const auto& c : rs) {
        list.push_back(c.to_json());
        pass = pass && c.pass;
      }
      fj["n"] = n;
      fj["epsilon"] = eps;
      fj["depth"] = a.tree.stats().depth;
      fj["checks"] = list;
      fj["pass"] = pass;
      fams.push_back(fj);
      all = all && pass;
    }
  }
  report["families"] = fams;
  report["pass"] = all;
  return report;
}

}  // namespace genvor::checks
