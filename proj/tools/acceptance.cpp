// genvor_acceptance: one PASS/FAIL line per acceptance criterion.
//
//   genvor_acceptance            run 1..10
//   genvor_acceptance 3 7        run the listed criteria
//
// Exit 0 when every selected criterion passes, 1 otherwise. Failing criteria
// print their first counterexample on stderr. GENVOR_SEED shifts every seed.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "genvor/checks.hpp"
#include "genvor/instances.hpp"
#include "genvor/io.hpp"
#include "genvor/oracle.hpp"

using namespace genvor;
using nlohmann::json;

namespace {

uint64_t g_seed = 1;

struct Outcome {
  bool pass = true;
  std::string summary;
  json counterexample;
};

struct Config {
  FamilyKind kind;
  int d;
};

const std::vector<Config> kConfigs{{FamilyKind::MultOffset, 2},
                                   {FamilyKind::MultOffset, 3},
                                   {FamilyKind::Scaling2D, 2},
                                   {FamilyKind::NearestFurthest, 2},
                                   {FamilyKind::NearestFurthest, 3}};

std::string label(const Config& c) { return family_tag(c.kind) + "/d" + std::to_string(c.d); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

uint64_t mix(uint64_t a, uint64_t b) { return (a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2))) * 1000003; }

// Folds a check into a running outcome, keeping the first counterexample seen.
struct Tally {
  uint64_t samples = 0, violations = 0;
  double worst = 0;
  json first;

  void add(const checks::CheckResult& r, const std::string& where) {
    samples += r.samples;
    violations += r.violations;
    worst = std::max(worst, r.worst);
    if (!r.pass && first.is_null()) first = json{{"where", where}, {"check", r.to_json()}};
  }
  void violate(json ce) {
    ++violations;
    if (first.is_null()) first = std::move(ce);
  }
};

// The shared build corpus: per family/dim and eps in {0.5, 0.1}, 20 instances with n cycling 8, 64, 256.
struct CorpusEntry {
  Config cfg;
  double eps;
  int n;
  uint64_t seed;
};

std::vector<CorpusEntry> ann_corpus() {
  std::vector<CorpusEntry> out;
  const int sizes[] = {8, 64, 256};
  for (const Config& c : kConfigs)
    for (double eps : {0.5, 0.1})
      for (int i = 0; i < 20; ++i)
        out.push_back({c, eps, sizes[i % 3], mix(g_seed, out.size() + 1)});
  return out;
}

const std::vector<int> kScalingSizes{50, 100, 200, 400, 800};

Outcome c1_ann() {
  auto t0 = std::chrono::steady_clock::now();
  Tally t;
  int builds = 0;
  for (const CorpusEntry& e : ann_corpus()) {
    Instance inst = random_instance(e.cfg.kind, e.n, e.cfg.d, e.eps, e.seed);
    Artifact a = Artifact::build(inst);
    ++builds;
    auto r = checks::search_ratio(*a.family, a.tree, e.eps, 500, e.seed ^ 0xa11);
    std::ostringstream where;
    where << label(e.cfg) << " n=" << e.n << " eps=" << e.eps << " seed=" << e.seed;
    t.add(r, where.str());
  }
  double secs = seconds_since(t0);
  std::ostringstream s;
  s << "builds=" << builds << " queries=" << t.samples << " violations=" << t.violations
    << " worst_ratio=" << t.worst << " elapsed_s=" << secs;
  Outcome o{t.violations == 0 && secs < 300, s.str(), t.first};
  if (o.pass == false && t.first.is_null()) o.counterexample = json{{"elapsed_s", secs}, {"budget_s", 300}};
  return o;
}

Outcome c2_deciders() {
  Tally t;
  const int per_family = 10000, instances = 5, per = per_family / instances;
  for (const Config& c : kConfigs) {
    for (int i = 0; i < instances; ++i) {
      uint64_t seed = mix(g_seed, 200 + 17 * static_cast<int>(c.kind) + 5 * c.d + i);
      int n = 8 << (i % 4);  // 8..64
      // Fine eps in 3D costs minutes per structure; criterion 1 covers it end to end.
      double eps = i % 2 == 0 || c.d > 2 ? 0.5 : 0.1;
      Instance inst = random_instance(c.kind, n, c.d, eps, seed);
      auto f = make_family(transform_instance(inst, fit_similarity(inst)));
      std::string where = label(c) + " n=" + std::to_string(n) + " seed=" + std::to_string(seed);
      t.add(checks::near_contract(*f, eps, per, seed + 1), where);
      t.add(checks::interval_contract(*f, eps, per, seed + 2, 0), where);
      t.add(checks::interval_contract(*f, eps, per, seed + 3, 8), where);
    }
  }
  std::ostringstream s;
  s << "triples=" << t.samples << " violations=" << t.violations << " worst_within_ratio=" << t.worst;
  return {t.violations == 0, s.str(), t.first};
}

Outcome c3_sandwich() {
  Tally t;
  const int instances = 10, per = 100;
  for (const Config& c : kConfigs) {
    for (int i = 0; i < instances; ++i) {
      uint64_t seed = mix(g_seed, 300 + 17 * static_cast<int>(c.kind) + 5 * c.d + i);
      int n = 4 + static_cast<int>(seed % 61);  // 4..64
      Instance inst = random_instance(c.kind, n, c.d, 0.1, seed);
      auto f = make_family(transform_instance(inst, fit_similarity(inst)));
      t.add(checks::clustering_sandwich(*f, per, seed + 1),
            label(c) + " n=" + std::to_string(n) + " seed=" + std::to_string(seed));
    }
  }
  std::ostringstream s;
  s << "samples=" << t.samples << " violations=" << t.violations;
  return {t.violations == 0, s.str(), t.first};
}

Outcome c4_splitting() {
  Tally t;
  uint64_t calls = 0, fallbacks = 0;
  BuildHooks hooks;
  const DistanceFamily* current = nullptr;
  hooks.on_split = [&](std::span<const int> ids, const Partition& part, double x) {
    size_t m = part.size();
    size_t low = approx_clustering(*current, ids, 1.0, x / 4, &part).size();
    size_t high = approx_clustering(*current, ids, 1.0, x, &part).size();
    ++t.samples;
    if (4 * low < m || 8 * high > 7 * m)
      t.violate(json{{"family", current->tag()}, {"m", m}, {"x", x}, {"parts_quarter", low}, {"parts_full", high}});
  };
  auto run = [&](const Instance& inst) {
    // The hook needs the normalized family the build sees; build it the same way.
    Instance norm = transform_instance(inst, fit_similarity(inst));
    auto f = make_family(norm);
    current = f.get();
    SearchTree tree = SearchTree::build(*f, norm.epsilon, norm.seed, hooks);
    calls += tree.stats().split.calls;
    fallbacks += tree.stats().split.fallbacks;
  };
  int builds = 0;
  for (const CorpusEntry& e : ann_corpus()) run(random_instance(e.cfg.kind, e.n, e.cfg.d, e.eps, e.seed)), ++builds;
  for (int n : kScalingSizes) run(random_instance(FamilyKind::MultOffset, n, 2, 0.5, mix(g_seed, 900 + n), true)), ++builds;
  double frac = calls ? static_cast<double>(fallbacks) / static_cast<double>(calls) : 0;
  std::ostringstream s;
  s << "builds=" << builds << " splits=" << t.samples << " violations=" << t.violations << " fallbacks=" << fallbacks
    << "/" << calls << " (" << 100 * frac << "%)";
  Outcome o{t.violations == 0 && t.samples == calls && frac <= 0.01, s.str(), t.first};
  if (!o.pass && o.counterexample.is_null())
    o.counterexample = json{{"calls", calls}, {"hook_calls", t.samples}, {"fallbacks", fallbacks}};
  return o;
}

bool rel_close(double got, double ref, double rel) { return std::abs(got - ref) <= rel * std::max(std::abs(ref), 1e-12); }

Outcome c5_closed_forms() {
  Rng rng(mix(g_seed, 500));
  Tally mo_sep, contain, fn_sep, scale;
  const double rel = 1e-6;
  auto rand_point = [&](int d, double lo, double hi) {
    Point p(d);
    for (int k = 0; k < d; ++k) p[k] = rng.uniform(lo, hi);
    return p;
  };
  // Cover bisection in the plane: the closed form only sees |p_i - p_j|, and 3D covers this fine take seconds each.
  for (int t = 0; t < 1000; ++t) {
    int d = 2;
    MultOffsetSite a{rand_point(d, 0.25, 0.75), rng.uniform(0.5, 2), rng.uniform(0, 0.05)};
    MultOffsetSite b{rand_point(d, 0.25, 0.75), rng.uniform(0.5, 2), rng.uniform(0, 0.05)};
    MultOffsetFamily f({a, b});
    double got = f.pairwise_sep(0, 1);
    double ref = oracle::bisect_sep(f, 0, 1, rel * got / 4);
    ++mo_sep.samples;
    if (!rel_close(got, ref, rel)) mo_sep.violate(json{{"case", "mo_pairwise_sep"}, {"got", got}, {"bisect", ref}});
  }
  for (int t = 0; t < 1000;) {
    int d = 2 + t % 2;
    MultOffsetSite si{rand_point(d, 0, 1), rng.uniform(0.5, 1.0), rng.uniform(0, 0.2)};
    MultOffsetSite sj{rand_point(d, 0, 1), rng.uniform(1.0, 2.0), rng.uniform(0, 0.2)};
    double delta = rng.uniform(0.05, 1.0);
    double y = mo_containment_threshold(si, sj, delta);
    // Below these levels one of the balls is empty and containment is vacuous.
    if (!(y > sj.a && y > si.a / (1 + delta))) continue;
    ++t, ++contain.samples;
    bool above = mo_ball_contained(si, sj, y * (1 + rel), delta);
    bool below = mo_ball_contained(si, sj, y * (1 - rel), delta);
    if (!above || below) contain.violate(json{{"case", "mo_containment_threshold"}, {"y", y}, {"delta", delta},
                                              {"contained_above", above}, {"contained_below", below}});
  }
  for (int t = 0; t < 1000; ++t) {
    int d = 2 + t % 2;
    std::vector<std::vector<Point>> sets(2);
    for (auto& s : sets) {
      Point c = rand_point(d, 0.3, 0.7);
      int k = 1 + static_cast<int>(rng.below(12));
      for (int i = 0; i < k; ++i) s.push_back(c + rand_point(d, -0.1, 0.1));
    }
    FurthestFamily f(sets, rng.uniform(0.05, 0.5));
    std::vector<Point> all = f.sets()[0].reduced;
    all.insert(all.end(), f.sets()[1].reduced.begin(), f.sets()[1].reduced.end());
    double ref = oracle::exact_meb(all).radius;
    double got = f.pairwise_sep(0, 1);
    ++fn_sep.samples;
    if (!rel_close(got, ref, rel)) fn_sep.violate(json{{"case", "fn_pairwise_sep"}, {"got", got}, {"exact_meb", ref}});
  }
  // Point-to-function distances for the polygon family, which the decider checks take from eval.
  for (int t = 0; t < 1000; ++t) {
    Instance inst = random_instance(FamilyKind::Scaling2D, 1, 2, 0.5, mix(g_seed, 5000 + t));
    const BodySpec& b = inst.bodies[0];
    FatBody2D body = make_fat_body(b.center, b.polygon);
    Point q = rand_point(2, -0.5, 1.5);
    double got = scale_distance(body, q);
    double ref = oracle::scale_distance_bisect(body, q);
    ++scale.samples;
    if (!rel_close(got, ref, rel)) scale.violate(json{{"case", "scale_distance"}, {"got", got}, {"bisect", ref}});
  }
  std::ostringstream s;
  s << "mo_sep=" << mo_sep.violations << "/" << mo_sep.samples << " containment=" << contain.violations << "/"
    << contain.samples << " fn_sep=" << fn_sep.violations << "/" << fn_sep.samples
    << " scale_distance=" << scale.violations << "/" << scale.samples << " (violations/cases)";
  json first = !mo_sep.first.is_null()    ? mo_sep.first
               : !contain.first.is_null() ? contain.first
               : !fn_sep.first.is_null()  ? fn_sep.first
                                          : scale.first;
  bool ok = mo_sep.violations + contain.violations + fn_sep.violations + scale.violations == 0;
  return {ok, s.str(), first};
}

Outcome c6_ball_intersection() {
  Rng rng(mix(g_seed, 600));
  Tally lower, upper;
  const double tol = 1e-9;
  for (int t = 0; t < 200; ++t) {
    int d = 2 + t % 2;
    int k = 1 + static_cast<int>(rng.below(64));
    std::vector<Point> pts;
    for (int i = 0; i < k; ++i) {
      Point p(d);
      for (int j = 0; j < d; ++j) p[j] = rng.normal();
      pts.push_back(p);
    }
    Ball u = oracle::exact_meb(pts, mix(g_seed, t));
    double z = u.radius;
    for (double delta : {0.05, 0.1}) {
      double outer = std::sqrt(4 * delta + 2 * delta * delta);
      auto inside = [&](const Point& q) {
        for (const auto& p : pts)
          if (dist(p, q) > (1 + delta) * z) return false;
        return true;
      };
      // The center itself, then rejection samples from the box around the claimed outer radius.
      std::vector<Point> samples{u.center};
      for (int s = 0; s < 4000 && samples.size() < 64; ++s) {
        Point q = u.center;
        for (int j = 0; j < d; ++j) q[j] += rng.uniform(-1.5, 1.5) * outer * z;
        if (inside(q)) samples.push_back(q);
      }
      for (const Point& q : samples) {
        double r = dist(q, u.center);
        ++lower.samples, ++upper.samples;
        json ce{{"points", k}, {"dim", d}, {"delta", delta}, {"z", z}, {"q", checks::point_json(q)},
                {"u", checks::point_json(u.center)}, {"dist_q_u", r}};
        if (r < delta * z * (1 - tol)) {
          ce["bound"] = "lower", ce["required"] = delta * z;
          lower.violate(ce);
        }
        if (r > outer * z * (1 + tol)) {
          ce["bound"] = "upper", ce["required"] = outer * z;
          upper.violate(ce);
        }
      }
    }
  }
  std::ostringstream s;
  s << "samples=" << lower.samples << " lower_violations=" << lower.violations
    << " upper_violations=" << upper.violations;
  return {lower.violations + upper.violations == 0, s.str(), !lower.first.is_null() ? lower.first : upper.first};
}

Outcome c7_properties() {
  int props = 0, failed = 0;
  json first;
  for (const Config& c : kConfigs) {
    uint64_t seed = mix(g_seed, 700 + 17 * static_cast<int>(c.kind) + c.d);
    Instance inst = random_instance(c.kind, 32, c.d, 0.1, seed);
    auto f = make_family(transform_instance(inst, fit_similarity(inst)));
    FamilyReport rep = validate_family(*f, 1000, seed);
    for (const auto& p : rep.properties) {
      ++props;
      if (!p.pass && ++failed == 1)
        first = json{{"where", label(c)}, {"property", p.name}, {"counterexample", p.counterexample}};
    }
  }
  std::ostringstream s;
  s << "properties=" << props << " failed=" << failed << " budget=1000";
  return {failed == 0, s.str(), first};
}

Outcome c8_flatten() {
  Tally eq, audit;
  int instances = 0;
  const int sizes[] = {8, 64, 256};
  for (const Config& c : kConfigs) {
    for (int i = 0; i < 4; ++i) {
      uint64_t seed = mix(g_seed, 800 + 17 * static_cast<int>(c.kind) + 5 * c.d + i);
      double eps = i % 2 == 0 ? 0.5 : 0.1;
      int n = sizes[i % 3];
      Artifact a = Artifact::build(random_instance(c.kind, n, c.d, eps, seed));
      ++instances;
      std::ostringstream where;
      where << label(c) << " n=" << n << " eps=" << eps << " seed=" << seed;
      eq.add(checks::flatten_equivalence(*a.family, a.tree, a.avd, 10000, seed + 1), where.str());
      audit.add(checks::region_audit(*a.family, a.avd, eps, 4, 2000, seed + 2), where.str());
    }
  }
  std::ostringstream s;
  s << "instances=" << instances << " queries=" << eq.samples << " mismatches=" << eq.violations
    << " audited_points=" << audit.samples << " audit_violations=" << audit.violations;
  return {eq.violations + audit.violations == 0, s.str(), !eq.first.is_null() ? eq.first : audit.first};
}

Outcome c9_scaling() {
  std::ostringstream s;
  bool ok = true;
  json first;
  double prev = 0, worst_ratio = 0;
  int worst_locates_gap = 0;
  for (int n : kScalingSizes) {
    Artifact a = Artifact::build(random_instance(FamilyKind::MultOffset, n, 2, 0.5, mix(g_seed, 900 + n), true));
    double nodes = static_cast<double>(a.tree.nodes().size() + a.tree.total_interval_nodes());
    int depth = a.tree.stats().depth, bound = a.tree.params().depth_bound;
    if (prev > 0) {
      double ratio = nodes / prev;
      worst_ratio = std::max(worst_ratio, ratio);
      if (ratio > 2.6 && first.is_null()) first = json{{"n", n}, {"nodes", nodes}, {"previous", prev}, {"ratio", ratio}};
      ok = ok && ratio <= 2.6;
    }
    if (depth > bound && first.is_null()) first = json{{"n", n}, {"depth", depth}, {"depth_bound", bound}};
    ok = ok && depth <= bound;
    Rng rng(mix(g_seed, 950 + n));
    int max_loc = 0;
    for (int i = 0; i < 2000; ++i) {
      Point q = random_query(rng, 2, i % 2 == 1);
      QueryAnswer r = a.tree.query(*a.family, q);
      max_loc = std::max(max_loc, r.locates);
      if (r.locates > depth + 1) {
        ok = false;
        if (first.is_null()) first = json{{"n", n}, {"q", checks::point_json(q)}, {"locates", r.locates}, {"depth", depth}};
      }
    }
    worst_locates_gap = std::max(worst_locates_gap, max_loc - (depth + 1));
    s << "n" << n << ":nodes=" << nodes << ",depth=" << depth << "/" << bound << ",max_locates=" << max_loc << " ";
    prev = nodes;
  }
  s << "worst_ratio=" << worst_ratio;
  return {ok, s.str(), first};
}

Outcome c10_performance() {
  Instance inst = random_instance(FamilyKind::MultOffset, 10000, 2, 0.5, mix(g_seed, 1000), true);
  auto t0 = std::chrono::steady_clock::now();
  Artifact a = Artifact::build(inst);
  double build_ms = seconds_since(t0) * 1000;
  checks::BenchResult b = checks::bench(a, build_ms, 10000, mix(g_seed, 1001));
  double ratio = b.avg_query_ns / b.brute_force_ns;
  std::ostringstream s;
  s << "n=" << b.n << " build_ms=" << b.build_ms << " bytes=" << b.bytes << " avg_query_ns=" << b.avg_query_ns
    << " brute_force_ns=" << b.brute_force_ns << " ratio=" << ratio;
  Outcome o{ratio <= 0.5, s.str(), {}};
  if (!o.pass) o.counterexample = json{{"ratio", ratio}, {"required", 0.5}};
  return o;
}

const std::vector<std::pair<std::string, std::function<Outcome()>>> kCriteria{
    {"ann_correctness", c1_ann},       {"decider_contracts", c2_deciders}, {"clustering_sandwich", c3_sandwich},
    {"splitting_distance", c4_splitting}, {"closed_forms", c5_closed_forms}, {"ball_intersection_bound", c6_ball_intersection},
    {"family_properties", c7_properties}, {"flatten_equivalence", c8_flatten}, {"size_scaling", c9_scaling},
    {"query_performance", c10_performance}};

}  // namespace

int main(int argc, char** argv) {
  if (const char* s = std::getenv("GENVOR_SEED"); s && *s) g_seed = std::strtoull(s, nullptr, 10);
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    int k = std::atoi(argv[i]);
    if (k < 1 || k > static_cast<int>(kCriteria.size())) {
      std::cerr << "usage: genvor_acceptance [1-10 ...]\n";
      return 2;
    }
    which.push_back(k);
  }
  if (which.empty())
    for (int k = 1; k <= static_cast<int>(kCriteria.size()); ++k) which.push_back(k);
  bool all = true;
  for (int k : which) {
    const auto& [name, run] = kCriteria[k - 1];
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what(), {}};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << k << " " << name << ": " << o.summary << std::endl;
    if (!o.pass && !o.counterexample.is_null())
      std::cerr << "criterion " << k << " counterexample: " << o.counterexample.dump() << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
