// genvor: build, query and inspect approximate Voronoi structures for distance families.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "genvor/checks.hpp"
#include "genvor/instances.hpp"
#include "genvor/io.hpp"
#include "genvor/oracle.hpp"

using namespace genvor;
using nlohmann::json;

namespace {

constexpr int kOk = 0, kFailed = 1, kBadInput = 2, kRejected = 3;

std::optional<uint64_t> env_seed() {
  const char* s = std::getenv("GENVOR_SEED");
  if (!s || !*s) return std::nullopt;
  char* end = nullptr;
  unsigned long long v = std::strtoull(s, &end, 10);
  if (*end != '\0') throw SchemaError("GENVOR_SEED must be a non-negative integer");
  return v;
}

Instance load_with_seed(const std::string& path) {
  Instance inst = load_instance(path);
  if (auto s = env_seed()) inst.seed = *s;
  return inst;
}

Artifact load_artifact(const std::string& path) { return Artifact::deserialize(read_file(path)); }

json cell_json(const CanonicalCell& c) {
  Box b = cell_box(c);
  json idx = json::array();
  for (int k = 0; k < c.d; ++k) idx.push_back(c.idx[k]);
  return {{"level", c.level}, {"index", idx}, {"lo", checks::point_json(b.lo)}, {"hi", checks::point_json(b.hi)}};
}

int cmd_build(const std::string& in, const std::string& out, const std::string& dump) {
  Artifact a = Artifact::build(load_with_seed(in));
  write_file(out, a.serialize());
  if (!dump.empty()) {
    std::ofstream os(dump);
    if (!os) throw std::runtime_error("cannot write " + dump);
    a.avd.tree().dump(os);
  }
  const auto& p = a.tree.params();
  const auto& s = a.tree.stats();
  json summary{{"family", family_tag(a.instance.family)},
               {"n", p.n},
               {"epsilon", p.eps},
               {"seed", a.instance.seed},
               {"N", p.N},
               {"log2_N", p.log2_N},
               {"depth", s.depth},
               {"depth_bound", p.depth_bound},
               {"search_nodes", a.tree.nodes().size()},
               {"interval_nodes", a.tree.total_interval_nodes()},
               {"avd_nodes", a.avd.node_count()},
               {"node_count", a.tree.nodes().size() + a.tree.total_interval_nodes()}};
  std::cout << summary.dump() << "\n";
  return kOk;
}

int cmd_query(const std::string& art, const std::string& batch, bool flatten) {
  Artifact a = load_artifact(art);
  std::ifstream in(batch);
  if (!in) throw std::runtime_error("cannot open " + batch);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(batch + ": " + e.what());
  }
  auto qs = parse_query_batch(j, a.instance.dim);
  for (const Point& raw : qs) {
    Point q = a.transform.apply(raw);
    QueryAnswer r = flatten ? a.avd.query(*a.family, a.tree, q) : a.tree.query(*a.family, q);
    json line{{"id", r.id}, {"value", r.value},
              {"denormalized_value", denormalize_value(a.instance.family, a.transform, r.value)}};
    std::cout << line.dump() << "\n";
  }
  return kOk;
}

int cmd_export(const std::string& art, const std::string& out) {
  Artifact a = load_artifact(art);
  json regions = json::array();
  for (const AvdRegion& r : a.avd.regions()) {
    const auto& cands = a.avd.sketches()[r.sketch];
    Point c = cell_box(r.outer).center();
    json j{{"outer_cell", cell_json(r.outer)},
           {"representative_id", scan_ids(*a.family, cands, c).id},
           {"candidates", cands}};
    if (r.has_inner) j["inner_cell"] = cell_json(r.inner);
    regions.push_back(j);
  }
  json doc{{"family", family_tag(a.instance.family)}, {"dim", a.instance.dim}, {"regions", regions}};
  if (out.empty() || out == "-") {
    std::cout << doc.dump() << "\n";
  } else {
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot write " + out);
    os << doc.dump() << "\n";
  }
  return kOk;
}

int cmd_selftest(const std::string& family, std::optional<uint64_t> seed, int budget, bool fault) {
  checks::SelftestOptions opt;
  if (family == "all") {
    opt.families = {FamilyKind::MultOffset, FamilyKind::Scaling2D, FamilyKind::NearestFurthest};
  } else {
    auto k = family_from_tag(family);
    if (!k) throw SchemaError("unknown family \"" + family + "\"");
    opt.families = {*k};
  }
  opt.seed = seed ? *seed : env_seed().value_or(1);
  if (budget < 1) throw SchemaError("budget must be positive");
  opt.budget = budget;
  opt.inject_fault = fault;
  json rep = checks::selftest(opt);
  std::cout << rep.dump() << "\n";
  if (rep["pass"].get<bool>()) return kOk;
  for (const auto& f : rep["families"])
    for (const auto& c : f["checks"])
      if (!c["pass"].get<bool>()) {
        json ce{{"family", f["family"]}, {"dim", f["dim"]}, {"check", c["name"]}};
        if (c.contains("counterexample")) ce["counterexample"] = c["counterexample"];
        std::cerr << ce.dump() << "\n";
      }
  return kFailed;
}

int cmd_bench(const std::string& in, int queries) {
  if (queries < 1) throw SchemaError("--queries must be positive");
  Instance inst = load_with_seed(in);
  auto t0 = std::chrono::steady_clock::now();
  Artifact a = Artifact::build(inst);
  double build_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  checks::BenchResult b = checks::bench(a, build_ms, queries, inst.seed ^ 0x5eed);
  std::cout << "n,build_ms,bytes,avg_locates_per_query,avg_query_ns,brute_force_query_ns\n";
  std::cout << b.n << "," << b.build_ms << "," << b.bytes << "," << b.avg_locates << "," << b.avg_query_ns << ","
            << b.brute_force_ns << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate Voronoi structures for distance families"};
  app.require_subcommand(1);

  std::string in, out, dump, art, batch, family = "all";
  bool flatten = false, fault = false;
  std::optional<uint64_t> seed;
  int budget = 1000, queries = 10000;

  auto* build = app.add_subcommand("build", "Build and serialize the structure for an instance");
  build->add_option("instance", in, "Instance JSON")->required();
  build->add_option("-o,--out", out, "Artifact path")->required();
  build->add_option("--dump", dump, "Write the flattened quadtree in text form");

  auto* query = app.add_subcommand("query", "Answer a batch of queries");
  query->add_option("artifact", art)->required();
  query->add_option("queries", batch, "JSON array of coordinate arrays")->required();
  query->add_flag("--flatten", flatten, "Answer with the flattened diagram");

  auto* exp = app.add_subcommand("export-avd", "Export the diagram regions as JSON");
  exp->add_option("artifact", art)->required();
  exp->add_option("-o,--out", out, "Output path (stdout by default)");

  auto* st = app.add_subcommand("selftest", "Run the invariant battery");
  st->add_option("--family", family, "mult_offset, scaling2d, nearest_furthest or all");
  st->add_option("--seed", seed);
  st->add_option("--budget", budget);
  st->add_flag("--inject-fault", fault, "Build with a mis-set internal eps (negative control)");

  auto* bench = app.add_subcommand("bench", "Time structure queries against brute force");
  bench->add_option("instance", in)->required();
  bench->add_option("--queries", queries);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kBadInput;
  }

  try {
    if (*build) return cmd_build(in, out, dump);
    if (*query) return cmd_query(art, batch, flatten);
    if (*exp) return cmd_export(art, out);
    if (*st) return cmd_selftest(family, seed, budget, fault);
    if (*bench) return cmd_bench(in, queries);
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const SiteRejected& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRejected;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
  return kFailed;
}
