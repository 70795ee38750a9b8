#include "genvor/io.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <set>

namespace genvor {

using nlohmann::json;

std::string family_tag(FamilyKind k) {
  switch (k) {
    case FamilyKind::MultOffset: return "mult_offset";
    case FamilyKind::Scaling2D: return "scaling2d";
    case FamilyKind::NearestFurthest: return "nearest_furthest";
  }
  return "?";
}

std::optional<FamilyKind> family_from_tag(const std::string& tag) {
  for (FamilyKind k : {FamilyKind::MultOffset, FamilyKind::Scaling2D, FamilyKind::NearestFurthest})
    if (family_tag(k) == tag) return k;
  return std::nullopt;
}

int Instance::size() const {
  switch (family) {
    case FamilyKind::MultOffset: return static_cast<int>(weighted.size());
    case FamilyKind::Scaling2D: return static_cast<int>(bodies.size());
    case FamilyKind::NearestFurthest: return static_cast<int>(sets.size());
  }
  return 0;
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw SchemaError(where.empty() ? what : where + ": " + what);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) fail(where, "number must be finite");
  return v;
}

Point point(const json& j, int dim, const std::string& where) {
  if (!j.is_array()) fail(where, "expected a coordinate array");
  if (static_cast<int>(j.size()) != dim)
    fail(where, "expected " + std::to_string(dim) + " coordinates, got " + std::to_string(j.size()));
  Point p(dim);
  for (int k = 0; k < dim; ++k) p[k] = number(j[k], where + "[" + std::to_string(k) + "]");
  return p;
}

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  std::set<std::string> ok(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) fail(where, "unknown key \"" + it.key() + "\"");
}

const json& need(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing \"") + key + "\"");
  return *it;
}

json point_json(const Point& p) {
  json a = json::array();
  for (int k = 0; k < p.d; ++k) a.push_back(p[k]);
  return a;
}

}  // namespace

Instance parse_instance(const json& j) {
  if (!j.is_object()) fail("", "instance must be a JSON object");
  only_keys(j, {"family", "dim", "epsilon", "seed", "sites"}, "instance");
  Instance inst;
  const json& fam = need(j, "family", "instance");
  if (!fam.is_string()) fail("family", "expected a string");
  auto kind = family_from_tag(fam.get<std::string>());
  if (!kind) fail("family", "unknown family \"" + fam.get<std::string>() + "\"");
  inst.family = *kind;

  const json& dim = need(j, "dim", "instance");
  if (!dim.is_number_integer()) fail("dim", "expected an integer");
  int64_t d = dim.get<int64_t>();
  if (d < 1 || d > kMaxDim) fail("dim", "must lie in [1, " + std::to_string(kMaxDim) + "]");
  if (inst.family == FamilyKind::Scaling2D && d != 2) fail("dim", "scaling2d requires dim = 2");
  inst.dim = static_cast<int>(d);

  inst.epsilon = number(need(j, "epsilon", "instance"), "epsilon");
  if (!(inst.epsilon > 0 && inst.epsilon <= 1)) fail("epsilon", "must lie in (0, 1]");

  const json& seed = need(j, "seed", "instance");
  if (!seed.is_number_unsigned()) fail("seed", "expected a non-negative integer");
  inst.seed = seed.get<uint64_t>();

  const json& sites = need(j, "sites", "instance");
  if (!sites.is_array() || sites.empty()) fail("sites", "expected a non-empty array");
  for (size_t i = 0; i < sites.size(); ++i) {
    std::string where = "sites[" + std::to_string(i) + "]";
    const json& s = sites[i];
    if (!s.is_object()) fail(where, "expected an object");
    switch (inst.family) {
      case FamilyKind::MultOffset: {
        only_keys(s, {"p", "w", "a"}, where);
        MultOffsetSite site;
        site.p = point(need(s, "p", where), inst.dim, where + ".p");
        if (s.contains("w")) site.w = number(s["w"], where + ".w");
        if (s.contains("a")) site.a = number(s["a"], where + ".a");
        if (!(site.w > 0)) fail(where + ".w", "weight must be positive");
        if (!(site.a >= 0)) fail(where + ".a", "offset must be non-negative");
        inst.weighted.push_back(site);
        break;
      }
      case FamilyKind::Scaling2D: {
        only_keys(s, {"center", "polygon", "ellipse"}, where);
        BodySpec b;
        b.center = point(need(s, "center", where), 2, where + ".center");
        if (s.contains("polygon") == s.contains("ellipse")) fail(where, "give exactly one of polygon, ellipse");
        if (s.contains("polygon")) {
          const json& poly = s["polygon"];
          if (!poly.is_array() || poly.size() < 3) fail(where + ".polygon", "need at least three vertices");
          for (size_t v = 0; v < poly.size(); ++v)
            b.polygon.push_back(point(poly[v], 2, where + ".polygon[" + std::to_string(v) + "]"));
        } else {
          const json& e = s["ellipse"];
          if (!e.is_object()) fail(where + ".ellipse", "expected {a, b, angle}");
          only_keys(e, {"a", "b", "angle"}, where + ".ellipse");
          double a = number(need(e, "a", where + ".ellipse"), where + ".ellipse.a");
          double bb = number(need(e, "b", where + ".ellipse"), where + ".ellipse.b");
          double ang = e.contains("angle") ? number(e["angle"], where + ".ellipse.angle") : 0.0;
          if (!(a > 0) || !(bb > 0)) fail(where + ".ellipse", "axes must be positive");
          b.polygon = ellipse_polygon(b.center, a, bb, ang);
        }
        inst.bodies.push_back(std::move(b));
        break;
      }
      case FamilyKind::NearestFurthest: {
        only_keys(s, {"points"}, where);
        const json& pts = need(s, "points", where);
        if (!pts.is_array() || pts.empty()) fail(where + ".points", "expected a non-empty array");
        std::vector<Point> set;
        for (size_t v = 0; v < pts.size(); ++v)
          set.push_back(point(pts[v], inst.dim, where + ".points[" + std::to_string(v) + "]"));
        inst.sets.push_back(std::move(set));
        break;
      }
    }
  }
  return inst;
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
  return parse_instance(j);
}

json instance_to_json(const Instance& inst) {
  json j;
  j["family"] = family_tag(inst.family);
  j["dim"] = inst.dim;
  j["epsilon"] = inst.epsilon;
  j["seed"] = inst.seed;
  json sites = json::array();
  for (const auto& s : inst.weighted) sites.push_back({{"p", point_json(s.p)}, {"w", s.w}, {"a", s.a}});
  for (const auto& b : inst.bodies) {
    json poly = json::array();
    for (const auto& v : b.polygon) poly.push_back(point_json(v));
    sites.push_back({{"center", point_json(b.center)}, {"polygon", poly}});
  }
  for (const auto& set : inst.sets) {
    json pts = json::array();
    for (const auto& p : set) pts.push_back(point_json(p));
    sites.push_back({{"points", pts}});
  }
  j["sites"] = sites;
  return j;
}

Point Similarity::apply(const Point& x) const {
  Point y(x.d);
  for (int k = 0; k < x.d; ++k) y[k] = scale * x[k] + shift[k];
  return y;
}

Point Similarity::invert(const Point& y) const {
  Point x(y.d);
  for (int k = 0; k < y.d; ++k) x[k] = (y[k] - shift[k]) / scale;
  return x;
}

Similarity fit_similarity(const Instance& inst) {
  int d = inst.dim;
  Point lo(d), hi(d);
  for (int k = 0; k < d; ++k) lo[k] = INFINITY, hi[k] = -INFINITY;
  auto take = [&](const Point& p) {
    for (int k = 0; k < d; ++k) lo[k] = std::min(lo[k], p[k]), hi[k] = std::max(hi[k], p[k]);
  };
  for (const auto& s : inst.weighted) take(s.p);
  for (const auto& b : inst.bodies) {
    take(b.center);
    for (const auto& v : b.polygon) take(v);
  }
  for (const auto& set : inst.sets)
    for (const auto& p : set) take(p);
  double extent = 0;
  for (int k = 0; k < d; ++k) extent = std::max(extent, hi[k] - lo[k]);
  Similarity s;
  s.scale = extent > 0 ? 0.5 / extent : 1;
  s.shift = Point(d);
  for (int k = 0; k < d; ++k) s.shift[k] = 0.5 - s.scale * (0.5 * (lo[k] + hi[k]));
  return s;
}

Instance transform_instance(const Instance& inst, const Similarity& s) {
  Instance out = inst;
  for (auto& site : out.weighted) site.p = s.apply(site.p), site.a *= s.scale;
  for (auto& b : out.bodies) {
    b.center = s.apply(b.center);
    for (auto& v : b.polygon) v = s.apply(v);
  }
  for (auto& set : out.sets)
    for (auto& p : set) p = s.apply(p);
  return out;
}

double denormalize_value(FamilyKind k, const Similarity& s, double v) {
  // Scale distances are invariant under similarities; the other two families scale linearly.
  return k == FamilyKind::Scaling2D ? v : v / s.scale;
}

std::unique_ptr<DistanceFamily> make_family(const Instance& inst) {
  switch (inst.family) {
    case FamilyKind::MultOffset: return std::make_unique<MultOffsetFamily>(inst.weighted);
    case FamilyKind::Scaling2D: {
      std::vector<FatBody2D> bodies;
      for (size_t i = 0; i < inst.bodies.size(); ++i) {
        try {
          bodies.push_back(make_fat_body(inst.bodies[i].center, inst.bodies[i].polygon));
        } catch (const BodyRejected& e) {
          throw SiteRejected(static_cast<int>(i), "site " + std::to_string(i) + " rejected: " + e.what());
        }
      }
      return std::make_unique<ScalingFamily>(std::move(bodies));
    }
    case FamilyKind::NearestFurthest: return std::make_unique<FurthestFamily>(inst.sets, inst.epsilon);
  }
  throw std::logic_error("make_family: bad family");
}

std::vector<Point> parse_query_batch(const json& j, int dim) {
  if (!j.is_array()) fail("queries", "expected an array of coordinate arrays");
  std::vector<Point> out;
  for (size_t i = 0; i < j.size(); ++i) out.push_back(point(j[i], dim, "queries[" + std::to_string(i) + "]"));
  return out;
}

// ---------------------------------------------------------------- artifact

namespace {

constexpr char kMagic[8] = {'G', 'E', 'N', 'V', 'O', 'R', 'A', 'F'};

void write_point(Writer& w, const Point& p) {
  w.i32(p.d);
  for (int k = 0; k < p.d; ++k) w.f64(p[k]);
}

Point read_point(Reader& r, int dim) {
  int d = r.i32();
  if (d != dim) throw SchemaError("artifact: point dimension mismatch");
  Point p(d);
  for (int k = 0; k < d; ++k) p[k] = r.f64();
  return p;
}

void write_sites(Writer& w, const Instance& inst) {
  w.u64(inst.size());
  for (const auto& s : inst.weighted) write_point(w, s.p), w.f64(s.w), w.f64(s.a);
  for (const auto& b : inst.bodies) {
    write_point(w, b.center);
    w.u64(b.polygon.size());
    for (const auto& v : b.polygon) write_point(w, v);
  }
  for (const auto& set : inst.sets) {
    w.u64(set.size());
    for (const auto& p : set) write_point(w, p);
  }
}

void read_sites(Reader& r, Instance& inst) {
  uint64_t n = r.count(4);
  for (uint64_t i = 0; i < n; ++i) {
    switch (inst.family) {
      case FamilyKind::MultOffset: {
        MultOffsetSite s;
        s.p = read_point(r, inst.dim);
        s.w = r.f64(), s.a = r.f64();
        inst.weighted.push_back(s);
        break;
      }
      case FamilyKind::Scaling2D: {
        BodySpec b;
        b.center = read_point(r, 2);
        uint64_t m = r.count(4);
        for (uint64_t v = 0; v < m; ++v) b.polygon.push_back(read_point(r, 2));
        inst.bodies.push_back(std::move(b));
        break;
      }
      case FamilyKind::NearestFurthest: {
        uint64_t m = r.count(4);
        std::vector<Point> set;
        for (uint64_t v = 0; v < m; ++v) set.push_back(read_point(r, inst.dim));
        inst.sets.push_back(std::move(set));
        break;
      }
    }
  }
}

}  // namespace

Artifact Artifact::build(const Instance& input, const BuildHooks& hooks) {
  Artifact a;
  a.transform = fit_similarity(input);
  a.instance = transform_instance(input, a.transform);
  a.family = make_family(a.instance);
  a.tree = SearchTree::build(*a.family, a.instance.epsilon, a.instance.seed, hooks);
  a.avd = Avd::flatten(a.tree);
  return a;
}

std::vector<uint8_t> Artifact::serialize() const {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kArtifactVersion);
  w.str(family_tag(instance.family));
  w.i32(instance.dim);
  w.u64(static_cast<uint64_t>(instance.size()));
  w.f64(instance.epsilon);
  w.u64(instance.seed);
  w.f64(tree.params().N);
  w.f64(transform.scale);
  write_point(w, transform.shift);
  write_sites(w, instance);
  tree.write(w);
  avd.write(w);
  return std::move(w.bytes());
}

Artifact Artifact::deserialize(const std::vector<uint8_t>& bytes) {
  Reader r(bytes);
  Artifact a;
  try {
    char magic[sizeof kMagic];
    r.raw(magic, sizeof magic);
    if (!std::equal(magic, magic + sizeof magic, kMagic)) throw SchemaError("artifact: bad magic");
    uint32_t version = r.u32();
    if (version != kArtifactVersion) throw SchemaError("artifact: unsupported version " + std::to_string(version));
    auto kind = family_from_tag(r.str());
    if (!kind) throw SchemaError("artifact: unknown family tag");
    a.instance.family = *kind;
    a.instance.dim = r.i32();
    if (a.instance.dim < 1 || a.instance.dim > kMaxDim) throw SchemaError("artifact: bad dimension");
    uint64_t n = r.u64();
    a.instance.epsilon = r.f64();
    a.instance.seed = r.u64();
    double N = r.f64();
    a.transform.scale = r.f64();
    a.transform.shift = read_point(r, a.instance.dim);
    read_sites(r, a.instance);
    if (static_cast<uint64_t>(a.instance.size()) != n) throw SchemaError("artifact: site count mismatch");
    a.tree = SearchTree::read(r);
    a.avd = Avd::read(r);
    if (r.remaining() != 0) throw SchemaError("artifact: trailing bytes");
    if (a.tree.dim() != a.instance.dim || a.tree.params().N != N || a.tree.params().n != static_cast<int>(n))
      throw SchemaError("artifact: header disagrees with the stored structure");
  } catch (const std::runtime_error& e) {
    if (dynamic_cast<const SchemaError*>(&e)) throw;
    throw SchemaError(e.what());
  }
  a.family = make_family(a.instance);
  return a;
}

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("cannot write " + path);
}

}  // namespace genvor
