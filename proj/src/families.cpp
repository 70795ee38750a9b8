#include "genvor/families.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace genvor {

namespace {

void check_nonempty(std::span<const int> ids, const char* what) {
  if (ids.empty()) throw std::invalid_argument(std::string(what) + ": empty subset");
}

void check_delta(double delta, const char* what) {
  if (!(delta > 0) || !std::isfinite(delta)) throw std::invalid_argument(std::string(what) + ": delta must be positive");
}

double lipschitz_shrink_side(int level) { return 0.5 * cell_side(level); }

}  // namespace

// ---------------------------------------------------------------- mult_offset

double mo_pairwise_sep(const MultOffsetSite& si, const MultOffsetSite& sj) {
  double wsum = si.w + sj.w;
  double v = dist(si.p, sj.p) * si.w * sj.w / wsum + (si.a * sj.w + sj.a * si.w) / wsum;
  return std::max(std::max(si.a, sj.a), v);
}

double mo_containment_threshold(const MultOffsetSite& si, const MultOffsetSite& sj, double delta) {
  if (!(si.w <= sj.w)) throw std::invalid_argument("mo_containment_threshold: needs w_i <= w_j");
  return (dist(si.p, sj.p) + si.a / si.w - sj.a / sj.w) / ((1 + delta) / si.w - 1 / sj.w);
}

bool mo_ball_contained(const MultOffsetSite& si, const MultOffsetSite& sj, double y, double delta) {
  double rj = (y - sj.a) / sj.w;
  if (rj < 0) return true;
  double ri = ((1 + delta) * y - si.a) / si.w;
  if (ri < 0) return false;
  return dist(si.p, sj.p) + rj <= ri;
}

MultOffsetFamily::MultOffsetFamily(std::vector<MultOffsetSite> sites) : sites_(std::move(sites)) {
  if (sites_.empty()) throw std::invalid_argument("mult_offset: no sites");
  d_ = sites_[0].p.d;
  if (d_ < 1 || d_ > kMaxDim) throw std::invalid_argument("mult_offset: dimension out of range");
  soa_.d = d_;
  for (const auto& s : sites_) {
    if (s.p.d != d_) throw std::invalid_argument("mult_offset: mixed dimensions");
    if (!all_finite(s.p)) throw std::invalid_argument("mult_offset: non-finite point");
    if (!(s.w > 0) || !std::isfinite(s.w)) throw std::invalid_argument("mult_offset: weight must be positive");
    if (!(s.a >= 0) || !std::isfinite(s.a)) throw std::invalid_argument("mult_offset: offset must be non-negative");
    soa_.push(s.p, s.w, s.a);
  }
}

double MultOffsetFamily::eval(int id, const Point& q) const {
  // Same operation order as the batched scan kernel.
  const auto& s = sites_[id];
  double acc = 0;
  for (int k = 0; k < d_; ++k) {
    double t = s.p.x[k] - q.x[k];
    acc = acc + t * t;
  }
  return s.w * std::sqrt(acc) + s.a;
}

double MultOffsetFamily::growth(int id, double y) const {
  const auto& s = sites_[id];
  return std::max(0.0, (y - s.a) / s.w);
}

Box MultOffsetFamily::sublevel_bbox(int id, double y) const {
  const auto& s = sites_[id];
  double r = std::max(0.0, (y - s.a) / s.w);
  Box b{s.p, s.p};
  for (int i = 0; i < d_; ++i) b.lo[i] -= r, b.hi[i] += r;
  return b;
}

bool MultOffsetFamily::cell_keep(int id, double y, const Box& cell) const {
  const auto& s = sites_[id];
  if (y < s.a) return false;
  return min_dist(s.p, cell) <= (y - s.a) / s.w;
}

EvalBounds MultOffsetFamily::eval_bounds(int id, const Box& b) const {
  const auto& s = sites_[id];
  return {s.w * min_dist(s.p, b) + s.a, s.w * max_dist(s.p, b) + s.a};
}

BoxStatus MultOffsetFamily::fine_status(int id, double y, int level, const CanonicalCell& q) const {
  const auto& s = sites_[id];
  if (y < s.a) return BoxStatus::None;
  double R = (y - s.a) / s.w;
  Box qb = cell_box(q);
  if (min_dist(s.p, qb) > R) return BoxStatus::None;
  // Largest point-to-subcell distance is attained at a corner subcell, axis by axis.
  double side = cell_side(level);
  double acc = 0;
  for (int i = 0; i < d_; ++i) {
    double p = s.p.x[i];
    auto gap = [&](double lo, double hi) { return p < lo ? lo - p : (p > hi ? p - hi : 0.0); };
    double g = std::max(gap(qb.lo[i], qb.lo[i] + side), gap(qb.hi[i] - side, qb.hi[i]));
    acc += g * g;
  }
  return std::sqrt(acc) <= R ? BoxStatus::All : BoxStatus::Mixed;
}

bool MultOffsetFamily::sublevels_intersect(int a, int b, double y) const {
  const auto& sa = sites_[a];
  const auto& sb = sites_[b];
  if (y < sa.a || y < sb.a) return false;
  return dist(sa.p, sb.p) <= (y - sa.a) / sa.w + (y - sb.a) / sb.w;
}

SketchResult MultOffsetFamily::sketch(std::span<const int> ids, double delta, double cr_bound) const {
  check_nonempty(ids, "mo_sketch");
  check_delta(delta, "mo_sketch");
  int pick = ids[0];
  for (int id : ids) {
    double w = sites_[id].w, wp = sites_[pick].w;
    if (w < wp || (w == wp && id < pick)) pick = id;
  }
  double m = static_cast<double>(ids.size());
  return {{pick}, ids.size() == 1 ? 0.0 : 3 * cr_bound * m / delta};
}

// ---------------------------------------------------------------- scaling2d

namespace {

double cross2(const Point& a, const Point& b) { return a.x[0] * b.x[1] - a.x[1] * b.x[0]; }

double orient(const Point& a, const Point& b, const Point& c) { return cross2(b - a, c - a); }

bool on_segment(const Point& a, const Point& b, const Point& p) {
  return std::min(a.x[0], b.x[0]) <= p.x[0] && p.x[0] <= std::max(a.x[0], b.x[0]) &&
         std::min(a.x[1], b.x[1]) <= p.x[1] && p.x[1] <= std::max(a.x[1], b.x[1]);
}

bool segments_meet(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
  double d1 = orient(q1, q2, p1), d2 = orient(q1, q2, p2);
  double d3 = orient(p1, p2, q1), d4 = orient(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

// Liang-Barsky clip of segment ab against the closed box.
bool segment_meets_box(const Point& a, const Point& b, const Box& bx) {
  double t0 = 0, t1 = 1;
  for (int i = 0; i < 2; ++i) {
    double dx = b.x[i] - a.x[i];
    double ps[2] = {-dx, dx};
    double qs[2] = {a.x[i] - bx.lo.x[i], bx.hi.x[i] - a.x[i]};
    for (int s = 0; s < 2; ++s) {
      if (ps[s] == 0) {
        if (qs[s] < 0) return false;
      } else {
        double r = qs[s] / ps[s];
        if (ps[s] < 0) t0 = std::max(t0, r);
        else t1 = std::min(t1, r);
      }
    }
  }
  return t0 <= t1;
}

double point_segment_dist(const Point& p, const Point& a, const Point& b) {
  Point ab = b - a;
  double l2 = dot(ab, ab);
  double t = l2 > 0 ? std::clamp(dot(p - a, ab) / l2, 0.0, 1.0) : 0.0;
  return dist(p, a + t * ab);
}

Point scaled_vertex(const FatBody2D& b, double y, int i) { return b.center + y * (b.boundary[i] - b.center); }

FatBody2D build_geometry(const Point& center, std::vector<Point> poly) {
  if (center.d != 2) throw std::invalid_argument("scaling2d: bodies must be planar");
  if (!all_finite(center)) throw std::invalid_argument("scaling2d: non-finite center");
  std::vector<Point> v;
  for (const auto& p : poly) {
    if (p.d != 2 || !all_finite(p)) throw std::invalid_argument("scaling2d: invalid boundary vertex");
    if (v.empty() || !(v.back() == p)) v.push_back(p);
  }
  while (v.size() > 1 && v.front() == v.back()) v.pop_back();
  if (v.size() < 3) throw std::invalid_argument("scaling2d: boundary needs at least three vertices");
  double area = 0;
  for (size_t i = 0; i < v.size(); ++i) area += cross2(v[i] - center, v[(i + 1) % v.size()] - center);
  if (area < 0) std::reverse(v.begin(), v.end());

  FatBody2D b;
  b.center = center;
  b.boundary = v;
  size_t k = v.size();
  double winding = 0;
  for (size_t i = 0; i < k; ++i) {
    Point a = v[i] - center, c = v[(i + 1) % k] - center;
    double cr = cross2(a, c);
    if (!(cr > 0)) throw BodyRejected("scaling2d: boundary is not star-shaped about the center", v[i]);
    winding += std::atan2(cr, dot(a, c));
    Point e = v[(i + 1) % k] - v[i];
    double len = norm(e);
    b.normal.push_back(Point{e.x[1] / len, -e.x[0] / len});
    b.h.push_back(cr / len);
  }
  if (std::abs(winding - 2 * std::numbers::pi) > 1e-6)
    throw BodyRejected("scaling2d: boundary winds more than once about the center", v[0]);

  b.r = INFINITY;
  for (size_t i = 0; i < k; ++i) b.r = std::min(b.r, point_segment_dist(center, v[i], v[(i + 1) % k]));
  for (const auto& p : v) b.outer = std::max(b.outer, dist(p, center));
  for (size_t i = 0; i < k; ++i)
    for (size_t j = i + 1; j < k; ++j) b.diam = std::max(b.diam, dist(v[i], v[j]));
  b.alpha = b.outer / b.r;
  b.convex = true;
  double scale = b.outer * b.outer;
  for (size_t i = 0; i < k; ++i) {
    Point e1 = v[(i + 1) % k] - v[i], e2 = v[(i + 2) % k] - v[(i + 1) % k];
    if (cross2(e1, e2) < -1e-12 * scale) b.convex = false;
  }

  std::vector<double> ang(k);
  for (size_t i = 0; i < k; ++i) ang[i] = std::atan2(v[i].x[1] - center.x[1], v[i].x[0] - center.x[0]);
  b.angle_start = static_cast<int>(std::min_element(ang.begin(), ang.end()) - ang.begin());
  double base = ang[b.angle_start];
  for (size_t j = 0; j < k; ++j) {
    double a = ang[(b.angle_start + j) % k];
    if (j > 0 && a <= base) a += 2 * std::numbers::pi;
    b.angle.push_back(a);
  }
  return b;
}

}  // namespace

double scale_distance(const FatBody2D& b, const Point& q) {
  Point v = q - b.center;
  if (v.x[0] == 0 && v.x[1] == 0) return 0;
  double th = std::atan2(v.x[1], v.x[0]);
  if (th < b.angle[0]) th += 2 * std::numbers::pi;
  size_t j = std::upper_bound(b.angle.begin(), b.angle.end(), th) - b.angle.begin();
  j = j == 0 ? 0 : j - 1;
  size_t e = (b.angle_start + j) % b.boundary.size();
  return std::max(0.0, dot(v, b.normal[e]) / b.h[e]);
}

FatCheck fat_check(const FatBody2D& b) {
  FatCheck out;
  out.r = b.r;
  out.alpha = b.alpha;
  if (b.convex) {
    out.ok = true;
    return out;
  }
  size_t k = b.boundary.size();
  std::vector<double> cum(k + 1, 0);
  for (size_t i = 0; i < k; ++i) cum[i + 1] = cum[i] + dist(b.boundary[i], b.boundary[(i + 1) % k]);
  std::vector<Point> samples(b.boundary);
  const int count = 1 << 10;
  for (int s = 0; s < count; ++s) {
    double t = (s + 0.5) / count * cum[k];
    size_t e = std::upper_bound(cum.begin(), cum.end(), t) - cum.begin() - 1;
    e = std::min(e, k - 1);
    double u = (t - cum[e]) / (cum[e + 1] - cum[e]);
    samples.push_back(b.boundary[e] + u * (b.boundary[(e + 1) % k] - b.boundary[e]));
  }
  const double limit = 1 + 1e-9;
  for (const Point& p : samples) {
    Point to = b.center - p;
    double L = norm(to);
    if (L <= b.r * (1 + 1e-12)) continue;
    double beta = std::asin(b.r / L);
    Point u = (1 / L) * to;
    // Fan of rays from p across the cone, each followed until it reaches the inner disc.
    for (int a = -2; a <= 2; ++a) {
      double phi = beta * a / 2;
      double c = std::cos(phi), sn = std::sin(phi);
      Point dir{u.x[0] * c - u.x[1] * sn, u.x[0] * sn + u.x[1] * c};
      double disc = b.r * b.r - L * L * sn * sn;
      double reach = L * c - std::sqrt(std::max(0.0, disc));
      for (int step = 1; step <= 16; ++step) {
        Point z = p + (reach * step / 16) * dir;
        if (scale_distance(b, z) > limit) {
          out.ok = false;
          out.violation = p;
          out.reason = "cone condition fails at a boundary point";
          return out;
        }
      }
    }
  }
  out.ok = true;
  return out;
}

FatBody2D make_fat_body(const Point& center, std::vector<Point> polygon, bool check_fat) {
  FatBody2D b = build_geometry(center, std::move(polygon));
  if (check_fat) {
    FatCheck fc = fat_check(b);
    if (!fc.ok) throw BodyRejected("scaling2d: body is not rounded fat (" + fc.reason + ")", fc.violation);
  }
  return b;
}

std::vector<Point> ellipse_polygon(const Point& center, double a, double b, double angle, int k) {
  if (!(a > 0) || !(b > 0)) throw std::invalid_argument("ellipse: axes must be positive");
  if (k < 3) throw std::invalid_argument("ellipse: need at least three vertices");
  std::vector<Point> out;
  double ca = std::cos(angle), sa = std::sin(angle);
  for (int i = 0; i < k; ++i) {
    double t = 2 * std::numbers::pi * i / k;
    double x = a * std::cos(t), y = b * std::sin(t);
    out.push_back(Point{center.x[0] + ca * x - sa * y, center.x[1] + sa * x + ca * y});
  }
  return out;
}

bool body_meets_box(const FatBody2D& b, double y, const Box& bx) {
  if (y <= 0) return bx.contains(b.center);
  double tc = scale_distance(b, bx.center());
  if (tc <= y) return true;
  if (tc - bx.half_diagonal() / b.r > y) return false;
  size_t k = b.boundary.size();
  for (size_t i = 0; i < k; ++i)
    if (segment_meets_box(scaled_vertex(b, y, i), scaled_vertex(b, y, (i + 1) % k), bx)) return true;
  // No edge touches the box: the box is wholly inside or wholly outside.
  return scale_distance(b, bx.lo) <= y;
}

bool bodies_meet(const FatBody2D& a, const FatBody2D& b, double y) {
  if (y <= 0) return a.center == b.center;
  double gap = dist(a.center, b.center);
  if (gap > y * (a.outer + b.outer)) return false;
  if (gap <= y * (a.r + b.r)) return true;
  size_t ka = a.boundary.size(), kb = b.boundary.size();
  for (size_t i = 0; i < ka; ++i) {
    Point p1 = scaled_vertex(a, y, i), p2 = scaled_vertex(a, y, (i + 1) % ka);
    for (size_t j = 0; j < kb; ++j)
      if (segments_meet(p1, p2, scaled_vertex(b, y, j), scaled_vertex(b, y, (j + 1) % kb))) return true;
  }
  return scale_distance(b, scaled_vertex(a, y, 0)) <= y || scale_distance(a, scaled_vertex(b, y, 0)) <= y;
}

namespace {

std::vector<Point> rotate_lowest(std::vector<Point> p) {
  auto it = std::min_element(p.begin(), p.end(), [](const Point& u, const Point& v) {
    return u.x[1] < v.x[1] || (u.x[1] == v.x[1] && u.x[0] < v.x[0]);
  });
  std::rotate(p.begin(), it, p.end());
  return p;
}

std::vector<Point> minkowski_convex(std::vector<Point> P, std::vector<Point> Q) {
  P = rotate_lowest(std::move(P));
  Q = rotate_lowest(std::move(Q));
  size_t n = P.size(), m = Q.size();
  P.push_back(P[0]), P.push_back(P[1]);
  Q.push_back(Q[0]), Q.push_back(Q[1]);
  std::vector<Point> out;
  size_t i = 0, j = 0;
  while (i < n || j < m) {
    out.push_back(P[i] + Q[j]);
    double c = cross2(P[i + 1] - P[i], Q[j + 1] - Q[j]);
    if (c >= 0 && i < n) ++i;
    if (c <= 0 && j < m) ++j;
  }
  return out;
}

// Gauge of a convex polygon holding the origin in its interior.
double convex_gauge(const std::vector<Point>& M, const Point& v) {
  double best = 0;
  size_t k = M.size();
  for (size_t i = 0; i < k; ++i) {
    Point e = M[(i + 1) % k] - M[i];
    double len = norm(e);
    if (len == 0) continue;
    Point n{e.x[1] / len, -e.x[0] / len};
    double h = dot(n, M[i]);
    if (h > 0) best = std::max(best, dot(v, n) / h);
  }
  return best;
}

}  // namespace

double fat_pairwise_sep(const FatBody2D& a, const FatBody2D& b) {
  Point gap = b.center - a.center;
  if (gap.x[0] == 0 && gap.x[1] == 0) return 0;
  if (a.convex && b.convex) {
    std::vector<Point> ka, kb;
    for (const auto& p : a.boundary) ka.push_back(p - a.center);
    for (const auto& p : b.boundary) kb.push_back(Point{0, 0} - (p - b.center));
    return convex_gauge(minkowski_convex(ka, kb), gap);
  }
  double g = norm(gap);
  double lo = g / (a.outer + b.outer), hi = g / (a.r + b.r);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    (bodies_meet(a, b, mid) ? hi : lo) = mid;
  }
  return hi;
}

ScalingFamily::ScalingFamily(std::vector<FatBody2D> bodies) : bodies_(std::move(bodies)) {
  if (bodies_.empty()) throw std::invalid_argument("scaling2d: no bodies");
  max_alpha_ = 1;
  for (const auto& b : bodies_) max_alpha_ = std::max(max_alpha_, b.alpha);
  zeta_ = 2 * max_alpha_;
}

double ScalingFamily::growth(int id, double y) const {
  const auto& b = bodies_[id];
  return y * b.diam / (2 * b.alpha);
}

Box ScalingFamily::sublevel_bbox(int id, double y) const {
  const auto& b = bodies_[id];
  Box out{b.center, b.center};
  for (const auto& p : b.boundary)
    for (int i = 0; i < 2; ++i) {
      double v = b.center.x[i] + y * (p.x[i] - b.center.x[i]);
      out.lo.x[i] = std::min(out.lo.x[i], v);
      out.hi.x[i] = std::max(out.hi.x[i], v);
    }
  return out;
}

bool ScalingFamily::cell_keep(int id, double y, const Box& cell) const { return body_meets_box(bodies_[id], y, cell); }

EvalBounds ScalingFamily::eval_bounds(int id, const Box& bx) const {
  const auto& b = bodies_[id];
  double t = scale_distance(b, bx.center());
  double e = bx.half_diagonal() / b.r;
  return {std::max(0.0, t - e), t + e};
}

BoxStatus ScalingFamily::fine_status(int id, double y, int level, const CanonicalCell& q) const {
  Box qb = cell_box(q);
  if (!body_meets_box(bodies_[id], y, qb)) return BoxStatus::None;
  // Every subcell meets the body once all subcell centers lie inside it.
  if (eval_bounds(id, qb.shrunk(lipschitz_shrink_side(level))).hi <= y) return BoxStatus::All;
  return BoxStatus::Mixed;
}

double ScalingFamily::pairwise_sep(int a, int b) const { return fat_pairwise_sep(bodies_[a], bodies_[b]); }

bool ScalingFamily::sublevels_intersect(int a, int b, double y) const { return bodies_meet(bodies_[a], bodies_[b], y); }

namespace {

// K_j inside s*K_i with both bodies moved to a common center.
bool dominated(const FatBody2D& bi, const FatBody2D& bj, double s) {
  for (const auto& v : bj.boundary)
    if (scale_distance(bi, bi.center + (v - bj.center)) > s) return false;
  for (const auto& w : bi.boundary)
    if (scale_distance(bj, bj.center + (w - bi.center)) * s < 1) return false;
  return true;
}

}  // namespace

SketchResult ScalingFamily::sketch(std::span<const int> ids, double delta, double cr_bound) const {
  check_nonempty(ids, "fat_sketch");
  check_delta(delta, "fat_sketch");
  if (ids.size() == 1) return {{ids[0]}, 0};
  std::vector<int> order(ids.begin(), ids.end());
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return bodies_[a].r > bodies_[b].r || (bodies_[a].r == bodies_[b].r && a < b);
  });
  const FatBody2D& first = bodies_[order[0]];
  double r1 = first.r;
  double amax = 1;
  for (int id : ids) amax = std::max(amax, bodies_[id].alpha);
  // Bodies that fit in the inner disc of the largest one are covered by it outright.
  std::vector<int> big{order[0]};
  for (size_t t = 1; t < order.size(); ++t)
    if (bodies_[order[t]].alpha * bodies_[order[t]].r > r1) big.push_back(order[t]);

  std::vector<int> picked{order[0]};
  double D = delta * r1 / (4 * amax * amax);
  double side = D / std::sqrt(2.0);
  double R = amax * r1;
  double cnt = std::ceil(2 * R / side);
  if (big.size() > 1 && cnt * cnt <= 65536) {
    std::vector<char> used(size(), 0);
    used[order[0]] = 1;
    int c = static_cast<int>(cnt);
    Point origin{0, 0};
    for (int ix = 0; ix < c; ++ix)
      for (int iy = 0; iy < c; ++iy) {
        Box tile{Point{-R + ix * side, -R + iy * side}, Point{-R + (ix + 1) * side, -R + (iy + 1) * side}};
        if (min_dist(origin, tile) > R) continue;
        for (int id : big) {
          const FatBody2D& b = bodies_[id];
          Box moved{tile.lo + b.center, tile.hi + b.center};
          if (body_meets_box(b, 1, moved)) {
            if (!used[id]) used[id] = 1, picked.push_back(id);
            break;
          }
        }
      }
  } else if (big.size() > 1) {
    for (size_t t = 1; t < big.size(); ++t) {
      const FatBody2D& bj = bodies_[big[t]];
      bool covered = false;
      for (int i : picked)
        if (dominated(bodies_[i], bj, 1 + delta / 4)) {
          covered = true;
          break;
        }
      if (!covered) picked.push_back(big[t]);
    }
  }
  std::sort(picked.begin(), picked.end());
  double m = static_cast<double>(ids.size());
  double y0 = sketch_c_ * cr_bound * m / delta;
  for (int i : picked) {
    const FatBody2D& bi = bodies_[i];
    for (int j : ids)
      y0 = std::max(y0, 8 * bi.alpha * dist(bodies_[j].center, bi.center) / (delta * (1 + delta / 4) * bi.diam));
  }
  return {picked, y0};
}

// ---------------------------------------------------------------- nearest_furthest

namespace {

Ball circumball(const Point* const* r, int k, int d) {
  if (k == 0) return {Point(d), -1};
  if (k == 1) return {*r[0], 0};
  const Point& o = *r[0];
  Eigen::MatrixXd A(k - 1, k - 1);
  Eigen::VectorXd rhs(k - 1);
  std::vector<Point> e(k - 1);
  for (int i = 1; i < k; ++i) e[i - 1] = *r[i] - o;
  for (int i = 0; i < k - 1; ++i) {
    for (int j = 0; j < k - 1; ++j) A(i, j) = 2 * dot(e[i], e[j]);
    rhs(i) = dot(e[i], e[i]);
  }
  Eigen::VectorXd lam = A.completeOrthogonalDecomposition().solve(rhs);
  Point c = o;
  for (int i = 0; i < k - 1; ++i) c = c + lam(i) * e[i];
  double rad = 0;
  for (int i = 0; i < k; ++i) rad = std::max(rad, dist(c, *r[i]));
  return {c, rad};
}

bool inside(const Ball& b, const Point& p) {
  if (b.radius < 0) return false;
  return dist(b.center, p) <= b.radius * (1 + 1e-12) + 1e-300;
}

// Move-to-front recursion; the support never exceeds d+1 points.
Ball mtf_ball(std::vector<Point>& pts, size_t end, std::vector<const Point*>& support, int d) {
  Ball b = circumball(support.data(), static_cast<int>(support.size()), d);
  if (static_cast<int>(support.size()) == d + 1) return b;
  for (size_t i = 0; i < end; ++i) {
    if (inside(b, pts[i])) continue;
    Point p = pts[i];
    support.push_back(&p);
    b = mtf_ball(pts, i, support, d);
    support.pop_back();
    std::rotate(pts.begin(), pts.begin() + i, pts.begin() + i + 1);
  }
  return b;
}

MebResult farthest_iteration(std::span<const Point> pts, double mu, size_t cap) {
  if (pts.empty()) throw std::invalid_argument("meb: empty point set");
  int d = pts[0].d;
  MebResult out;
  auto farthest = [&](const Point& c) {
    size_t best = 0;
    double bd = -1;
    for (size_t i = 0; i < pts.size(); ++i) {
      double v = dist(c, pts[i]);
      if (v > bd) bd = v, best = i;
    }
    return std::pair{best, bd};
  };
  std::vector<Point> core{pts[0]};
  auto [f0, d0] = farthest(pts[0]);
  if (d0 > 0) core.push_back(pts[f0]);
  Ball ball{pts[0], 0};
  double cover = d0;
  for (size_t it = 0;; ++it) {
    ball = min_ball_small(core);
    auto [fi, di] = farthest(ball.center);
    cover = di;
    if (di <= (1 + mu) * ball.radius || di == 0 || it >= cap) break;
    core.push_back(pts[fi]);
  }
  out.center = ball.center;
  out.radius = cover;
  out.lower = std::min(ball.radius, cover);
  out.coreset = std::move(core);
  (void)d;
  return out;
}

}  // namespace

Ball min_ball_small(std::span<const Point> pts) {
  if (pts.empty()) throw std::invalid_argument("min_ball_small: empty point set");
  std::vector<Point> v(pts.begin(), pts.end());
  std::vector<const Point*> support;
  support.reserve(kMaxDim + 1);
  return mtf_ball(v, v.size(), support, v[0].d);
}

MebResult meb_coreset(std::span<const Point> pts, double mu) {
  if (!(mu > 0 && mu < 1)) throw std::invalid_argument("meb_coreset: mu must lie in (0,1)");
  return farthest_iteration(pts, mu, static_cast<size_t>(std::ceil(2 / mu)));
}

MebResult meb_tight(std::span<const Point> pts) { return farthest_iteration(pts, 1e-12, pts.size() + 8); }

namespace {

struct GridKey {
  std::array<int64_t, kMaxDim> k{};
  auto operator<=>(const GridKey&) const = default;
};

}  // namespace

UncertainSet make_uncertain_set(std::vector<Point> pts, double eps) {
  if (pts.empty()) throw std::invalid_argument("nearest_furthest: empty uncertain set");
  if (!(eps > 0 && eps <= 1)) throw std::invalid_argument("nearest_furthest: eps must lie in (0,1]");
  int d = pts[0].d;
  for (const auto& p : pts)
    if (p.d != d || !all_finite(p)) throw std::invalid_argument("nearest_furthest: invalid point");
  UncertainSet u;
  u.points = std::move(pts);
  double mu = eps * eps / 144;
  MebResult core = meb_coreset(u.points, mu);
  u.core_center = core.center;
  u.core_radius = core.radius;
  if (core.radius == 0) {
    u.reduced = {u.points[0]};
  } else {
    double s = eps * core.radius / (8 * std::sqrt(static_cast<double>(d)) * (1 + mu));
    std::map<GridKey, size_t> seen;
    for (const auto& p : u.points) {
      GridKey g;
      for (int i = 0; i < d; ++i) g.k[i] = static_cast<int64_t>(std::floor((p.x[i] - core.center.x[i]) / s));
      if (seen.emplace(g, u.reduced.size()).second) u.reduced.push_back(p);
    }
  }
  MebResult tight = meb_tight(u.reduced);
  u.meb_center = tight.center;
  u.meb_radius = tight.lower;
  return u;
}

double fn_distance(const UncertainSet& u, const Point& q) {
  double best = 0;
  for (const auto& s : u.reduced) best = std::max(best, dist(q, s));
  return best;
}

double fn_pairwise_sep(const UncertainSet& a, const UncertainSet& b) {
  std::vector<Point> all(a.reduced);
  all.insert(all.end(), b.reduced.begin(), b.reduced.end());
  return meb_tight(all).radius;
}

FurthestFamily::FurthestFamily(std::vector<std::vector<Point>> sets, double eps) : eps_(eps) {
  if (sets.empty()) throw std::invalid_argument("nearest_furthest: no sets");
  if (sets[0].empty()) throw std::invalid_argument("nearest_furthest: empty uncertain set");
  d_ = sets[0][0].d;
  if (d_ < 1 || d_ > kMaxDim) throw std::invalid_argument("nearest_furthest: dimension out of range");
  for (auto& s : sets) {
    if (!s.empty() && s[0].d != d_) throw std::invalid_argument("nearest_furthest: mixed dimensions");
    sets_.push_back(make_uncertain_set(std::move(s), eps));
  }
}

Box FurthestFamily::ball_box_intersection(int id, double radius) const {
  const auto& u = sets_[id];
  Box b{Point(d_), Point(d_)};
  for (int i = 0; i < d_; ++i) b.lo[i] = -INFINITY, b.hi[i] = INFINITY;
  for (const auto& s : u.reduced)
    for (int i = 0; i < d_; ++i) {
      b.lo[i] = std::max(b.lo[i], s.x[i] - radius);
      b.hi[i] = std::min(b.hi[i], s.x[i] + radius);
    }
  for (int i = 0; i < d_; ++i)
    if (b.lo[i] > b.hi[i]) b.lo[i] = b.hi[i] = u.meb_center.x[i];
  return b;
}

Box FurthestFamily::sublevel_bbox(int id, double y) const { return ball_box_intersection(id, y); }

Box FurthestFamily::cover_bbox(int id, double y, int level) const {
  return ball_box_intersection(id, y + cell_side(level) * std::sqrt(static_cast<double>(d_)));
}

bool FurthestFamily::cell_keep(int id, double y, const Box& cell) const {
  return fn_distance(sets_[id], cell.center()) <= y + cell.half_diagonal();
}

EvalBounds FurthestFamily::eval_bounds(int id, const Box& b) const {
  const auto& u = sets_[id];
  double lo = 0, hi = 0;
  for (const auto& s : u.reduced) {
    lo = std::max(lo, min_dist(s, b));
    hi = std::max(hi, max_dist(s, b));
  }
  lo = std::max(lo, fn_distance(u, b.center()) - b.half_diagonal());
  return {lo, hi};
}

BoxStatus FurthestFamily::fine_status(int id, double y, int level, const CanonicalCell& q) const {
  double h = lipschitz_shrink_side(level);
  double slack = h * std::sqrt(static_cast<double>(d_));
  EvalBounds eb = eval_bounds(id, cell_box(q).shrunk(h));
  if (eb.lo > y + slack) return BoxStatus::None;
  if (eb.hi <= y + slack) return BoxStatus::All;
  return BoxStatus::Mixed;
}

SketchResult FurthestFamily::sketch(std::span<const int> ids, double delta, double cr_bound) const {
  check_nonempty(ids, "fn_sketch");
  check_delta(delta, "fn_sketch");
  int pick = *std::min_element(ids.begin(), ids.end());
  double m = static_cast<double>(ids.size());
  return {{pick}, ids.size() == 1 ? 0.0 : 4 * m * cr_bound / delta};
}

}  // namespace genvor
