#include "genvor/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace genvor::oracle {

bool OracleReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

MinResult exact_min(const DistanceFamily& f, const Point& q) {
  MinResult r;
  for (int id = 0; id < f.size(); ++id) {
    double v = f.eval(id, q);
    if (r.id < 0 || v < r.value) r = {id, v};
  }
  return r;
}

namespace {

bool meet_rec(const DistanceFamily& f, int a, int b, double y, int level, const CanonicalCell& q) {
  BoxStatus sa = f.box_status(a, y, level, q);
  if (sa == BoxStatus::None) return false;
  BoxStatus sb = f.box_status(b, y, level, q);
  if (sb == BoxStatus::None) return false;
  if (sa == BoxStatus::All && sb == BoxStatus::All) return true;
  if (q.level >= level) return false;
  for (uint32_t c = 0; c < (1u << q.d); ++c)
    if (meet_rec(f, a, b, y, level, child_cell(q, c))) return true;
  return false;
}

}  // namespace

bool covers_meet(const DistanceFamily& f, int a, int b, double y, int level) {
  if (y < f.sublevel_nonempty_threshold(a) || y < f.sublevel_nonempty_threshold(b)) return false;
  return meet_rec(f, a, b, y, level, root_cell(f.dim()));
}

double bisect_sep(const DistanceFamily& f, int a, int b, double tol) {
  if (!(tol > 0)) throw std::invalid_argument("bisect_sep: tol must be positive");
  double lo = std::max(f.sublevel_nonempty_threshold(a), f.sublevel_nonempty_threshold(b));
  Point wa = f.sublevel_witness(a, lo), wb = f.sublevel_witness(b, lo);
  double hi = INFINITY;
  for (const Point& p : {wa, wb, 0.5 * (wa + wb)}) hi = std::min(hi, std::max(f.eval(a, p), f.eval(b, p)));
  double lip = std::max({1.0, f.lipschitz(a), f.lipschitz(b)});
  int level = grid_level_clamped(tol / (4 * lip), f.dim());
  if (!covers_meet(f, a, b, hi, level)) throw std::runtime_error("bisect_sep: upper bracket does not intersect");
  if (covers_meet(f, a, b, lo, level)) return lo;
  while (hi - lo > tol / 4) {
    double mid = 0.5 * (lo + hi);
    (covers_meet(f, a, b, mid, level) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

struct Dsu {
  std::vector<int> p;
  explicit Dsu(size_t n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
  bool unite(int a, int b) {
    a = find(a), b = find(b);
    if (a == b) return false;
    p[a] = b;
    return true;
  }
};

void guard(std::span<const int> ids) {
  if (ids.size() > kExactGuard) throw std::length_error("exact clustering: too many ids");
}

}  // namespace

Partition exact_ccs(const DistanceFamily& f, std::span<const int> ids, double level) {
  guard(ids);
  Dsu dsu(ids.size());
  for (size_t i = 0; i < ids.size(); ++i)
    for (size_t j = i + 1; j < ids.size(); ++j)
      if (f.pairwise_sep(ids[i], ids[j]) <= level) dsu.unite(static_cast<int>(i), static_cast<int>(j));
  std::vector<std::vector<int>> groups(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) groups[dsu.find(static_cast<int>(i))].push_back(ids[i]);
  Partition p;
  for (auto& g : groups)
    if (!g.empty()) p.parts.push_back(std::move(g));
  p.canonicalize();
  return p;
}

double exact_cr(const DistanceFamily& f, std::span<const int> ids) {
  guard(ids);
  struct Edge {
    double w;
    int i, j;
  };
  std::vector<Edge> edges;
  for (size_t i = 0; i < ids.size(); ++i)
    for (size_t j = i + 1; j < ids.size(); ++j)
      edges.push_back({f.pairwise_sep(ids[i], ids[j]), static_cast<int>(i), static_cast<int>(j)});
  std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) { return x.w < y.w; });
  Dsu dsu(ids.size());
  double cr = 0;
  for (const auto& e : edges)
    if (dsu.unite(e.i, e.j)) cr = e.w;
  return cr;
}

namespace {

// Solves the small system by Gaussian elimination; returns false when singular.
bool solve_small(std::vector<std::vector<double>> A, std::vector<double> b, std::vector<double>& x) {
  int n = static_cast<int>(b.size());
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    if (std::abs(A[piv][c]) < 1e-300) return false;
    std::swap(A[c], A[piv]);
    std::swap(b[c], b[piv]);
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      double m = A[r][c] / A[c][c];
      for (int k = c; k < n; ++k) A[r][k] -= m * A[c][k];
      b[r] -= m * b[c];
    }
  }
  x.resize(n);
  for (int i = 0; i < n; ++i) x[i] = b[i] / A[i][i];
  return true;
}

Ball ball_through(const std::vector<Point>& R, int d) {
  if (R.empty()) return {Point(d), -1};
  if (R.size() == 1) return {R[0], 0};
  if (R.size() == 2) return {0.5 * (R[0] + R[1]), 0.5 * dist(R[0], R[1])};
  size_t k = R.size() - 1;
  std::vector<Point> e;
  for (size_t i = 1; i < R.size(); ++i) e.push_back(R[i] - R[0]);
  std::vector<std::vector<double>> A(k, std::vector<double>(k));
  std::vector<double> b(k), lam;
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = 0; j < k; ++j) A[i][j] = 2 * dot(e[i], e[j]);
    b[i] = dot(e[i], e[i]);
  }
  if (!solve_small(A, b, lam)) {
    // Affinely dependent support: the extreme pair spans the ball.
    Ball best{R[0], -1};
    for (size_t i = 0; i < R.size(); ++i)
      for (size_t j = i + 1; j < R.size(); ++j) {
        Ball c{0.5 * (R[i] + R[j]), 0.5 * dist(R[i], R[j])};
        if (c.radius > best.radius) best = c;
      }
    return best;
  }
  Point c = R[0];
  for (size_t i = 0; i < k; ++i) c = c + lam[i] * e[i];
  return {c, dist(c, R[0])};
}

bool in_ball(const Ball& b, const Point& p) { return b.radius >= 0 && dist(b.center, p) <= b.radius * (1 + 1e-10) + 1e-14; }

Ball welzl(std::vector<Point>& P, size_t n, std::vector<Point>& R, int d) {
  if (n == 0 || static_cast<int>(R.size()) == d + 1) return ball_through(R, d);
  Point p = P[n - 1];
  Ball b = welzl(P, n - 1, R, d);
  if (in_ball(b, p)) return b;
  R.push_back(p);
  b = welzl(P, n - 1, R, d);
  R.pop_back();
  return b;
}

}  // namespace

Ball exact_meb(std::span<const Point> pts, uint64_t seed) {
  if (pts.empty()) throw std::invalid_argument("exact_meb: empty point set");
  if (pts.size() > 64) throw std::length_error("exact_meb: more than 64 points");
  std::vector<Point> P(pts.begin(), pts.end());
  std::mt19937_64 gen(seed);
  std::shuffle(P.begin(), P.end(), gen);
  std::vector<Point> R;
  return welzl(P, P.size(), R, P[0].d);
}

bool polygon_contains(const std::vector<Point>& poly, const Point& q) {
  bool in = false;
  size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = poly[i];
    const Point& b = poly[j];
    if ((a.x[1] > q.x[1]) != (b.x[1] > q.x[1])) {
      double x = (b.x[0] - a.x[0]) * (q.x[1] - a.x[1]) / (b.x[1] - a.x[1]) + a.x[0];
      if (q.x[0] < x) in = !in;
    }
  }
  return in;
}

double scale_distance_bisect(const FatBody2D& body, const Point& q) {
  if (q == body.center) return 0;
  auto member = [&](double t) {
    std::vector<Point> scaled;
    for (const auto& v : body.boundary) scaled.push_back(body.center + t * (v - body.center));
    return polygon_contains(scaled, q);
  };
  double lo = 0, hi = dist(q, body.center) / body.r * 2 + 1;
  while (!member(hi)) hi *= 2;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    (member(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace genvor::oracle
