#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "genvor/clustering.hpp"
#include "genvor/family.hpp"
#include "genvor/rng.hpp"

namespace genvor {

double tol_of(double v) { return std::max(1e-12, 1e-9 * std::abs(v)); }

Box DistanceFamily::cover_bbox(int id, double y, int) const { return sublevel_bbox(id, y); }

bool DistanceFamily::sublevels_intersect(int a, int b, double y) const { return pairwise_sep(a, b) <= y; }

BoxStatus DistanceFamily::box_status(int id, double y, int level, const CanonicalCell& q) const {
  if (y < sublevel_nonempty_threshold(id)) return BoxStatus::None;
  if (level <= q.level) return cell_keep(id, y, cell_box(ancestor(q, level))) ? BoxStatus::All : BoxStatus::None;
  return fine_status(id, y, level, q);
}

double sep_point(const DistanceFamily& f, int id, const Point& q) {
  if (id < 0 || id >= f.size()) throw std::invalid_argument("sep_point: invalid id");
  return f.eval(id, q);
}

double sep_sets(const DistanceFamily& f, std::span<const int> a, std::span<const int> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("sep_sets: empty side");
  double best = INFINITY;
  for (int i : a)
    for (int j : b) best = std::min(best, f.pairwise_sep(i, j));
  return best;
}

MinResult scan_ids(const DistanceFamily& f, std::span<const int> ids, const Point& q) {
  MinResult r;
  for (int id : ids) {
    double v = f.eval(id, q);
    if (r.id < 0 || v < r.value || (v == r.value && id < r.id)) r = {id, v};
  }
  return r;
}

MinResult scan_all(const DistanceFamily& f, const Point& q) {
  if (const SoaSites* s = f.soa()) {
    ScanResult r = scan_min(*s, q);
    return {static_cast<int>(r.index), r.value};
  }
  MinResult r;
  for (int id = 0; id < f.size(); ++id) {
    double v = f.eval(id, q);
    if (r.id < 0 || v < r.value) r = {id, v};
  }
  return r;
}

int cover_level(const DistanceFamily& f, int id, double y, double eps) {
  return grid_level_clamped(eps * f.growth(id, y), f.dim());
}

std::vector<CanonicalCell> sublevel_cells(const DistanceFamily& f, int id, double y, double r) {
  std::vector<CanonicalCell> out;
  if (y < f.sublevel_nonempty_threshold(id)) return out;
  int k = grid_level_clamped(r, f.dim());
  Box bb = f.cover_bbox(id, y, k);
  if (cell_count_in_box(bb, k) > (uint64_t{1} << 26)) throw std::length_error("sublevel_cells: too many cells");
  for_each_cell_in_box(bb, k, [&](const CanonicalCell& c) {
    if (f.cell_keep(id, y, cell_box(c))) out.push_back(c);
  });
  return out;
}

bool FamilyReport::all_pass() const {
  return std::all_of(properties.begin(), properties.end(), [](const PropertyResult& p) { return p.pass; });
}

namespace {

struct Harness {
  const DistanceFamily& f;
  Rng rng;
  int d;

  Point random_point(double lo, double hi) {
    Point p(d);
    for (int i = 0; i < d; ++i) p[i] = rng.uniform(lo, hi);
    return p;
  }

  int random_id() { return static_cast<int>(rng.below(f.size())); }

  std::vector<int> random_subset(int max_size, int must = -1) {
    int n = f.size();
    int m = 2 + static_cast<int>(rng.below(std::max(1, std::min(n, max_size) - 1)));
    m = std::min(m, n);
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    for (int i = 0; i < m; ++i) std::swap(all[i], all[i + rng.below(n - i)]);
    all.resize(m);
    if (must >= 0 && std::find(all.begin(), all.end(), must) == all.end()) all[0] = must;
    std::sort(all.begin(), all.end());
    return all;
  }

  // A level at which the sublevel set of id is non-empty and of moderate size.
  double random_level(int id) {
    double t = f.sublevel_nonempty_threshold(id);
    double v = f.eval(id, random_point(0.0, 1.0));
    double y = std::max(t, v) * rng.uniform(0.3, 1.2);
    if (y <= t) y = t * (1 + rng.uniform(0.01, 0.5)) + 1e-6;
    return y;
  }

  std::optional<Point> sample_sublevel(int id, double y) {
    Box b = f.sublevel_bbox(id, y);
    for (int t = 0; t < 400; ++t) {
      Point p(d);
      for (int i = 0; i < d; ++i) p[i] = rng.uniform(b.lo[i], b.hi[i]);
      if (f.eval(id, p) <= y) return p;
    }
    Point w = f.sublevel_witness(id, y);
    if (f.eval(id, w) <= y + tol_of(y)) return w;
    return std::nullopt;
  }

  double min_over(std::span<const int> ids, const Point& q) { return scan_ids(f, ids, q).value; }
};

std::string pt(const Point& p) {
  std::ostringstream os;
  os.precision(17);
  os << "[";
  for (int i = 0; i < p.d; ++i) os << (i ? "," : "") << p[i];
  os << "]";
  return os.str();
}

std::string ids_str(std::span<const int> ids) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < ids.size(); ++i) os << (i ? "," : "") << ids[i];
  os << "]";
  return os.str();
}

void fail(PropertyResult& r, const std::string& what) {
  if (r.pass) r.counterexample = what;
  r.pass = false;
}

}  // namespace

FamilyReport validate_family(const DistanceFamily& f, int budget, uint64_t seed) {
  if (f.size() < 2) throw std::invalid_argument("validate_family: need at least two functions");
  Harness h{f, Rng(seed), f.dim()};
  FamilyReport rep;
  double zeta = f.growth_constant();

  PropertyResult zero{"zero_level"};
  for (int s = 0; s < budget; ++s) {
    int id = h.random_id();
    ++zero.samples;
    if (f.sublevel_nonempty_threshold(id) > 0) continue;
    Point w = f.sublevel_witness(id, 0.0);
    if (f.eval(id, w) > 1e-12) fail(zero, "witness of zero level has positive value, id " + std::to_string(id));
    Point q = w;
    double scale = std::pow(10.0, -h.rng.uniform(1, 6));
    for (int i = 0; i < h.d; ++i) q[i] += scale * h.rng.normal();
    if (!(q == w) && f.eval(id, q) <= 0) fail(zero, "second zero point " + pt(q) + " for id " + std::to_string(id));
  }
  rep.properties.push_back(zero);

  PropertyResult cr0{"cr_zero"};
  for (int s = 0; s < budget / 10 + 1; ++s) {
    auto g = h.random_subset(6);
    ++cr0.samples;
    if (connectivity_level_exact(f, g) > 0) continue;
    // CR = 0 with distinct ids is only legitimate when the zero-level points coincide (perturbation).
    for (size_t i = 1; i < g.size(); ++i) {
      if (f.pairwise_sep(g[0], g[i]) > 0) continue;
      bool coincident = f.sublevel_nonempty_threshold(g[0]) == 0 && f.sublevel_nonempty_threshold(g[i]) == 0 &&
                        f.sublevel_witness(g[0], 0) == f.sublevel_witness(g[i], 0);
      if (!coincident) fail(cr0, "CR zero on " + ids_str(g));
    }
  }
  rep.properties.push_back(cr0);

  PropertyResult segment{"segment_contained"};
  for (int s = 0; s < budget; ++s) {
    int id = h.random_id();
    auto g = h.random_subset(6, id);
    double y = h.random_level(id);
    auto u = h.sample_sublevel(id, y), v = h.sample_sublevel(id, y);
    if (!u || !v) continue;
    ++segment.samples;
    double cap = (1 + zeta / 2) * y;
    for (int t = 0; t <= 16; ++t) {
      double a = t / 16.0;
      Point w = (1 - a) * *u + a * *v;
      if (!leq_tol(h.min_over(g, w), cap)) {
        fail(segment, "segment point " + pt(w) + " above (1+zeta/2)y for id " + std::to_string(id));
        break;
      }
    }
  }
  rep.properties.push_back(segment);

  PropertyResult cover{"segment_cover_connected"};
  for (int s = 0; s < budget / 4 + 1; ++s) {
    auto g = h.random_subset(6);
    int a = g[h.rng.below(g.size())];
    double y = h.random_level(a) * h.rng.uniform(1.0, 3.0);
    for (int id : g) y = std::max(y, f.sublevel_nonempty_threshold(id) * 1.01);
    int b = g[h.rng.below(g.size())];
    auto u = h.sample_sublevel(a, y), v = h.sample_sublevel(b, y);
    if (!u || !v) continue;
    const int steps = 512;
    std::vector<char> touched(g.size(), 0);
    bool covered = true;
    for (int t = 0; t <= steps && covered; ++t) {
      double w8 = t / static_cast<double>(steps);
      Point w = (1 - w8) * *u + w8 * *v;
      bool any = false;
      for (size_t i = 0; i < g.size(); ++i)
        if (f.eval(g[i], w) <= y) touched[i] = any = true;
      covered = any;
    }
    if (!covered) continue;
    ++cover.samples;
    std::vector<int> comp(g.size());
    for (size_t i = 0; i < g.size(); ++i) comp[i] = static_cast<int>(i);
    auto find = [&](int x) {
      while (comp[x] != x) x = comp[x] = comp[comp[x]];
      return x;
    };
    for (size_t i = 0; i < g.size(); ++i)
      for (size_t j = i + 1; j < g.size(); ++j)
        if (touched[i] && touched[j] && f.pairwise_sep(g[i], g[j]) <= y + tol_of(y)) comp[find(i)] = find(j);
    int root = -1;
    for (size_t i = 0; i < g.size(); ++i) {
      if (!touched[i]) continue;
      if (root < 0) root = find(i);
      else if (find(i) != root) {
        fail(cover, "covering sets disconnected for " + ids_str(g) + " at y=" + std::to_string(y));
        break;
      }
    }
  }
  rep.properties.push_back(cover);

  PropertyResult sk_conn{"sketch_connectivity"};
  for (int s = 0; s < budget / 10 + 1; ++s) {
    auto g = h.random_subset(8);
    double delta = h.rng.uniform() < 0.5 ? 0.1 : 0.5;
    double cr = connectivity_level_exact(f, g);
    SketchResult sk = f.sketch(g, delta, cr);
    ++sk_conn.samples;
    double crh = connectivity_level_exact(f, sk.members);
    double cap = (1 + delta) * (1 + zeta / 2) * std::max(sk.y0, cr);
    if (!leq_tol(crh, cap)) fail(sk_conn, "CR(H)=" + std::to_string(crh) + " exceeds bound for " + ids_str(g));
  }
  rep.properties.push_back(sk_conn);

  PropertyResult sk_rule{"sketch_rule"};
  for (int s = 0; s < budget; ++s) {
    auto g = h.random_subset(8);
    double delta = h.rng.uniform() < 0.5 ? 0.1 : 0.5;
    double cr = connectivity_level_exact(f, g);
    SketchResult sk = f.sketch(g, delta, cr);
    Point q = h.random_point(0.0, 1.0);
    if (h.rng.uniform() < 0.5) {
      // Push q outwards until it sits at or beyond the validity level.
      Point dir(h.d);
      for (int i = 0; i < h.d; ++i) dir[i] = h.rng.normal();
      dir = (1.0 / std::max(1e-12, norm(dir))) * dir;
      double r = 1.0;
      for (int t = 0; t < 200 && h.min_over(g, q) < sk.y0; ++t) {
        q = Point(h.d);
        for (int i = 0; i < h.d; ++i) q[i] = 0.5 + r * dir[i];
        r *= 1.5;
      }
    }
    double sg = h.min_over(g, q);
    if (sg < sk.y0) continue;
    ++sk_rule.samples;
    double sh = h.min_over(sk.members, q);
    if (!leq_tol(sh, (1 + delta) * sg)) fail(sk_rule, "sep(q,H) too large at " + pt(q) + " for " + ids_str(g));
  }
  rep.properties.push_back(sk_rule);

  PropertyResult nb{"not_both_near"};
  for (int s = 0; s < budget; ++s) {
    int a = h.random_id(), b = h.random_id();
    if (a == b) continue;
    ++nb.samples;
    Point q = h.random_point(-0.2, 1.2);
    double sep = f.pairwise_sep(a, b);
    double m = std::max(f.eval(a, q), f.eval(b, q));
    if (m < sep - tol_of(sep)) fail(nb, "max(f(q),g(q)) < sep at " + pt(q));
  }
  rep.properties.push_back(nb);

  PropertyResult growth_audit{"bounded_growth"};
  for (int s = 0; s < budget; ++s) {
    int id = h.random_id();
    double y = h.random_level(id);
    auto in = h.sample_sublevel(id, y);
    if (!in) continue;
    // Walk outwards from an interior point to a boundary-adjacent one.
    Point dir(h.d);
    for (int i = 0; i < h.d; ++i) dir[i] = h.rng.normal();
    dir = (1.0 / std::max(1e-12, norm(dir))) * dir;
    double lo = 0, hi = 1e-3;
    while (f.eval(id, *in + hi * dir) <= y && hi < 1e6) hi *= 2;
    for (int t = 0; t < 60; ++t) {
      double mid = 0.5 * (lo + hi);
      (f.eval(id, *in + mid * dir) <= y ? lo : hi) = mid;
    }
    Point x = *in + lo * dir;
    double eps = h.rng.uniform(0.01, 1.0);
    double rad = eps * f.growth(id, y);
    Point u(h.d);
    for (int i = 0; i < h.d; ++i) u[i] = h.rng.normal();
    double nu = norm(u);
    if (nu > 0) u = (rad * std::pow(h.rng.uniform(), 1.0 / h.d) / nu) * u;
    ++growth_audit.samples;
    if (!leq_tol(f.eval(id, x + u), (1 + eps) * y))
      fail(growth_audit, "growth exceeded at " + pt(x + u) + " id " + std::to_string(id) + " y=" + std::to_string(y));
  }
  rep.properties.push_back(growth_audit);
  return rep;
}

}  // namespace genvor
