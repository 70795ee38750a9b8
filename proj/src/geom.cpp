#include "genvor/geom.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace genvor {

Point::Point(std::initializer_list<double> c) {
  if (c.size() == 0 || c.size() > kMaxDim) throw std::invalid_argument("point dimension out of range");
  d = static_cast<int>(c.size());
  int i = 0;
  for (double v : c) x[i++] = v;
}

Point Point::from(std::span<const double> c) {
  if (c.empty() || c.size() > kMaxDim) throw std::invalid_argument("point dimension out of range");
  Point p(static_cast<int>(c.size()));
  for (size_t i = 0; i < c.size(); ++i) p.x[i] = c[i];
  return p;
}

bool Point::operator==(const Point& o) const {
  if (d != o.d) return false;
  for (int i = 0; i < d; ++i)
    if (x[i] != o.x[i]) return false;
  return true;
}

Point operator+(const Point& a, const Point& b) {
  Point r(a.d);
  for (int i = 0; i < a.d; ++i) r.x[i] = a.x[i] + b.x[i];
  return r;
}

Point operator-(const Point& a, const Point& b) {
  Point r(a.d);
  for (int i = 0; i < a.d; ++i) r.x[i] = a.x[i] - b.x[i];
  return r;
}

Point operator*(double s, const Point& a) {
  Point r(a.d);
  for (int i = 0; i < a.d; ++i) r.x[i] = s * a.x[i];
  return r;
}

double dot(const Point& a, const Point& b) {
  double s = 0;
  for (int i = 0; i < a.d; ++i) s += a.x[i] * b.x[i];
  return s;
}

double norm(const Point& a) { return std::sqrt(dot(a, a)); }

double dist2(const Point& a, const Point& b) {
  double s = 0;
  for (int i = 0; i < a.d; ++i) {
    double t = a.x[i] - b.x[i];
    s += t * t;
  }
  return s;
}

double dist(const Point& a, const Point& b) { return std::sqrt(dist2(a, b)); }

bool all_finite(const Point& p) {
  for (int i = 0; i < p.d; ++i)
    if (!std::isfinite(p.x[i])) return false;
  return true;
}

Point Box::center() const {
  Point c(lo.d);
  for (int i = 0; i < lo.d; ++i) c.x[i] = 0.5 * (lo.x[i] + hi.x[i]);
  return c;
}

double Box::half_diagonal() const { return 0.5 * dist(lo, hi); }

bool Box::contains(const Point& p) const {
  for (int i = 0; i < lo.d; ++i)
    if (p.x[i] < lo.x[i] || p.x[i] > hi.x[i]) return false;
  return true;
}

Box Box::shrunk(double by) const {
  Box b = *this;
  for (int i = 0; i < lo.d; ++i) {
    double c = 0.5 * (lo.x[i] + hi.x[i]);
    b.lo.x[i] = std::min(c, lo.x[i] + by);
    b.hi.x[i] = std::max(c, hi.x[i] - by);
  }
  return b;
}

double min_dist(const Point& p, const Box& b) {
  double s = 0;
  for (int i = 0; i < p.d; ++i) {
    double t = 0;
    if (p.x[i] < b.lo.x[i]) t = b.lo.x[i] - p.x[i];
    else if (p.x[i] > b.hi.x[i]) t = p.x[i] - b.hi.x[i];
    s += t * t;
  }
  return std::sqrt(s);
}

double max_dist(const Point& p, const Box& b) {
  double s = 0;
  for (int i = 0; i < p.d; ++i) {
    double t = std::max(std::abs(p.x[i] - b.lo.x[i]), std::abs(p.x[i] - b.hi.x[i]));
    s += t * t;
  }
  return std::sqrt(s);
}

bool boxes_meet(const Box& a, const Box& b) {
  for (int i = 0; i < a.lo.d; ++i)
    if (a.hi.x[i] < b.lo.x[i] || b.hi.x[i] < a.lo.x[i]) return false;
  return true;
}

bool CanonicalCell::operator==(const CanonicalCell& o) const {
  if (level != o.level || d != o.d) return false;
  for (int i = 0; i < d; ++i)
    if (idx[i] != o.idx[i]) return false;
  return true;
}

bool CanonicalCell::operator<(const CanonicalCell& o) const {
  if (level != o.level) return level < o.level;
  for (int i = 0; i < d; ++i)
    if (idx[i] != o.idx[i]) return idx[i] < o.idx[i];
  return false;
}

size_t CellHash::operator()(const CanonicalCell& c) const {
  uint64_t h = 0x9e3779b97f4a7c15ULL ^ c.level;
  for (int i = 0; i < c.d; ++i) {
    h ^= c.idx[i] + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdULL;
  }
  return static_cast<size_t>(h ^ (h >> 33));
}

CanonicalCell root_cell(int d) {
  CanonicalCell c;
  c.d = static_cast<uint8_t>(d);
  return c;
}

double cell_side(int level) { return std::ldexp(1.0, -level); }

Box cell_box(const CanonicalCell& c) {
  Box b{Point(c.d), Point(c.d)};
  double s = cell_side(c.level);
  for (int i = 0; i < c.d; ++i) {
    b.lo.x[i] = static_cast<double>(c.idx[i]) * s;
    b.hi.x[i] = static_cast<double>(c.idx[i] + 1) * s;
  }
  return b;
}

CanonicalCell ancestor(const CanonicalCell& c, int level) {
  CanonicalCell a = c;
  int shift = c.level - level;
  a.level = static_cast<uint8_t>(level);
  for (int i = 0; i < c.d; ++i) a.idx[i] = c.idx[i] >> shift;
  return a;
}

bool cell_contains(const CanonicalCell& outer, const CanonicalCell& inner) {
  if (outer.level > inner.level) return false;
  int shift = inner.level - outer.level;
  for (int i = 0; i < outer.d; ++i)
    if ((inner.idx[i] >> shift) != outer.idx[i]) return false;
  return true;
}

CanonicalCell common_ancestor(const CanonicalCell& a, const CanonicalCell& b) {
  int k = std::min(a.level, b.level);
  for (int i = 0; i < a.d; ++i) {
    uint64_t x = (a.idx[i] >> (a.level - k)) ^ (b.idx[i] >> (b.level - k));
    if (x != 0) k = std::min(k, k - (64 - std::countl_zero(x)));
  }
  return ancestor(a, k);
}

uint32_t quadrant_of(const CanonicalCell& outer, const CanonicalCell& inner) {
  int shift = inner.level - outer.level - 1;
  uint32_t q = 0;
  for (int i = 0; i < outer.d; ++i) q |= static_cast<uint32_t>((inner.idx[i] >> shift) & 1u) << i;
  return q;
}

CanonicalCell child_cell(const CanonicalCell& c, uint32_t quadrant) {
  CanonicalCell ch = c;
  ch.level = static_cast<uint8_t>(c.level + 1);
  for (int i = 0; i < c.d; ++i) ch.idx[i] = (c.idx[i] << 1) | ((quadrant >> i) & 1u);
  return ch;
}

std::string cell_to_string(const CanonicalCell& c) {
  std::ostringstream os;
  os << static_cast<int>(c.level) << " (";
  for (int i = 0; i < c.d; ++i) os << (i ? "," : "") << c.idx[i];
  os << ")";
  return os.str();
}

int grid_level_for(double r, int d) {
  if (!(r > 0) || !std::isfinite(r)) throw std::invalid_argument("grid_level_for: r must be positive and finite");
  if (d < 1) throw std::invalid_argument("grid_level_for: d must be >= 1");
  double t = r / std::sqrt(static_cast<double>(d));
  int k = -std::ilogb(t);
  if (k < 0) throw std::invalid_argument("grid_level_for: r exceeds sqrt(d)");
  return k;
}

int grid_level_clamped(double r, int d) {
  if (!(r > 0)) return kMaxLevel;
  if (!std::isfinite(r)) return 0;
  double t = r / std::sqrt(static_cast<double>(d));
  if (!(t > 0)) return kMaxLevel;
  int k = -std::ilogb(t);
  return std::clamp(k, 0, kMaxLevel);
}

bool in_unit_cube(const Point& q) {
  for (int i = 0; i < q.d; ++i)
    if (!(q.x[i] >= 0.0 && q.x[i] < 1.0)) return false;
  return true;
}

QPoint quantize(const Point& q) {
  QPoint r;
  r.d = q.d;
  for (int i = 0; i < q.d; ++i) r.v[i] = static_cast<uint64_t>(std::ldexp(q.x[i], kMaxLevel));
  return r;
}

bool qpoint_in_cell(const QPoint& q, const CanonicalCell& c) {
  int shift = kMaxLevel - c.level;
  for (int i = 0; i < q.d; ++i)
    if ((q.v[i] >> shift) != c.idx[i]) return false;
  return true;
}

CanonicalCell cell_of(const QPoint& q, int level) {
  CanonicalCell c;
  c.d = static_cast<uint8_t>(q.d);
  c.level = static_cast<uint8_t>(level);
  int shift = kMaxLevel - level;
  for (int i = 0; i < q.d; ++i) c.idx[i] = q.v[i] >> shift;
  return c;
}

bool point_in_cell(const Point& q, const CanonicalCell& c) {
  if (q.d != c.d) throw std::invalid_argument("point_in_cell: dimension mismatch");
  if (!in_unit_cube(q)) return false;
  return qpoint_in_cell(quantize(q), c);
}

std::optional<Box> BallRegion::bbox() const {
  Box b{ball_.center, ball_.center};
  for (int i = 0; i < ball_.center.d; ++i) {
    b.lo.x[i] -= ball_.radius;
    b.hi.x[i] += ball_.radius;
  }
  return b;
}

bool BallRegion::meets(const Box& c) const { return min_dist(ball_.center, c) <= ball_.radius; }

std::optional<Box> PointRegion::bbox() const { return Box{p_, p_}; }

bool PointRegion::meets(const Box& c) const { return c.contains(p_); }

namespace {

struct IndexRange {
  uint64_t lo = 1, hi = 0;
};

bool axis_range(const Box& b, int level, int axis, IndexRange& out) {
  uint64_t top = (uint64_t{1} << level) - 1;
  double lo = std::ldexp(b.lo.x[axis], level);
  double hi = std::ldexp(b.hi.x[axis], level);
  if (hi < 0 || lo > static_cast<double>(top) + 1) return false;
  double first = std::ceil(lo) - 1;
  out.lo = first <= 0 ? 0 : static_cast<uint64_t>(first);
  out.hi = hi >= static_cast<double>(top) ? top : static_cast<uint64_t>(std::floor(hi));
  return out.lo <= out.hi;
}

}  // namespace

uint64_t cell_count_in_box(const Box& b, int level) {
  uint64_t total = 1;
  for (int i = 0; i < b.dim(); ++i) {
    IndexRange r;
    if (!axis_range(b, level, i, r)) return 0;
    uint64_t len = r.hi - r.lo + 1;
    if (len != 0 && total > std::numeric_limits<uint64_t>::max() / len) return std::numeric_limits<uint64_t>::max();
    total *= len;
  }
  return total;
}

void for_each_cell_in_box(const Box& b, int level, const std::function<void(const CanonicalCell&)>& fn) {
  int d = b.dim();
  std::array<IndexRange, kMaxDim> r;
  for (int i = 0; i < d; ++i)
    if (!axis_range(b, level, i, r[i])) return;
  CanonicalCell c;
  c.d = static_cast<uint8_t>(d);
  c.level = static_cast<uint8_t>(level);
  for (int i = 0; i < d; ++i) c.idx[i] = r[i].lo;
  while (true) {
    fn(c);
    int i = 0;
    while (i < d) {
      if (c.idx[i] < r[i].hi) {
        ++c.idx[i];
        break;
      }
      c.idx[i] = r[i].lo;
      ++i;
    }
    if (i == d) return;
  }
}

std::vector<CanonicalCell> cells_covering(const Region& region, double r) {
  std::vector<CanonicalCell> out;
  auto bb = region.bbox();
  if (!bb) return out;
  int k = grid_level_for(r, bb->dim());
  if (cell_count_in_box(*bb, k) > (uint64_t{1} << 28)) throw std::length_error("cells_covering: too many cells");
  for_each_cell_in_box(*bb, k, [&](const CanonicalCell& c) {
    if (region.meets(cell_box(c))) out.push_back(c);
  });
  return out;
}

}  // namespace genvor
