#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace genvor {

constexpr int kMaxDim = 4;
constexpr int kMaxLevel = 62;

struct Point {
  int d = 0;
  std::array<double, kMaxDim> x{};

  Point() = default;
  explicit Point(int dim) : d(dim) {}
  Point(std::initializer_list<double> c);
  static Point from(std::span<const double> c);

  double& operator[](int i) { return x[i]; }
  double operator[](int i) const { return x[i]; }
  bool operator==(const Point& o) const;
};

Point operator+(const Point& a, const Point& b);
Point operator-(const Point& a, const Point& b);
Point operator*(double s, const Point& a);
double dot(const Point& a, const Point& b);
double norm(const Point& a);
double dist(const Point& a, const Point& b);
double dist2(const Point& a, const Point& b);
bool all_finite(const Point& p);

// Axis-aligned box, closed unless a caller says otherwise.
struct Box {
  Point lo, hi;
  int dim() const { return lo.d; }
  Point center() const;
  double half_diagonal() const;
  bool contains(const Point& p) const;
  Box shrunk(double by) const;
};

double min_dist(const Point& p, const Box& b);
double max_dist(const Point& p, const Box& b);
bool boxes_meet(const Box& a, const Box& b);

struct Ball {
  Point center;
  double radius = 0;
};

struct CanonicalCell {
  uint8_t level = 0;
  uint8_t d = 0;
  std::array<uint64_t, kMaxDim> idx{};

  bool operator==(const CanonicalCell& o) const;
  bool operator<(const CanonicalCell& o) const;
};

struct CellHash {
  size_t operator()(const CanonicalCell& c) const;
};

CanonicalCell root_cell(int d);
double cell_side(int level);
Box cell_box(const CanonicalCell& c);
CanonicalCell ancestor(const CanonicalCell& c, int level);
bool cell_contains(const CanonicalCell& outer, const CanonicalCell& inner);
CanonicalCell common_ancestor(const CanonicalCell& a, const CanonicalCell& b);
// Child quadrant bitmask of `inner` one level below `outer` (inner strictly inside outer).
uint32_t quadrant_of(const CanonicalCell& outer, const CanonicalCell& inner);
CanonicalCell child_cell(const CanonicalCell& c, uint32_t quadrant);
std::string cell_to_string(const CanonicalCell& c);

// Side-2^-k grid level for resolution r: 2^-k = 2^floor(log2(r/sqrt d)).
int grid_level_for(double r, int d);
// Same level clamped to [0, kMaxLevel]; r <= 0 or underflow maps to kMaxLevel.
int grid_level_clamped(double r, int d);

bool in_unit_cube(const Point& q);

// Point quantized to the level-kMaxLevel lattice; only meaningful for q in [0,1)^d.
struct QPoint {
  int d = 0;
  std::array<uint64_t, kMaxDim> v{};
};
QPoint quantize(const Point& q);
bool qpoint_in_cell(const QPoint& q, const CanonicalCell& c);
CanonicalCell cell_of(const QPoint& q, int level);

bool point_in_cell(const Point& q, const CanonicalCell& c);

// A region described by a bounding box and an exact-or-conservative closed-cube test.
class Region {
 public:
  virtual ~Region() = default;
  virtual std::optional<Box> bbox() const = 0;
  virtual bool meets(const Box& closed_cell) const = 0;
};

class BallRegion : public Region {
 public:
  explicit BallRegion(Ball b) : ball_(b) {}
  std::optional<Box> bbox() const override;
  bool meets(const Box& closed_cell) const override;

 private:
  Ball ball_;
};

class PointRegion : public Region {
 public:
  explicit PointRegion(Point p) : p_(p) {}
  std::optional<Box> bbox() const override;
  bool meets(const Box& closed_cell) const override;

 private:
  Point p_;
};

class EmptyRegion : public Region {
 public:
  std::optional<Box> bbox() const override { return std::nullopt; }
  bool meets(const Box&) const override { return false; }
};

// Visit the level-k cells whose closed cube meets the box (clipped to the unit cube).
void for_each_cell_in_box(const Box& b, int level, const std::function<void(const CanonicalCell&)>& fn);
uint64_t cell_count_in_box(const Box& b, int level);

std::vector<CanonicalCell> cells_covering(const Region& region, double r);

}  // namespace genvor
