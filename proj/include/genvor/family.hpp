#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "genvor/geom.hpp"
#include "genvor/kernels.hpp"

namespace genvor {

// Relative 1e-9 with absolute floor 1e-12.
double tol_of(double v);
inline bool leq_tol(double a, double b) { return a <= b + tol_of(b); }

enum class BoxStatus { None, All, Mixed };

struct EvalBounds {
  double lo = 0, hi = 0;
};

struct SketchResult {
  std::vector<int> members;
  double y0 = 0;
};

// A pairwise distance made distinct by (value, min id, max id).
struct SepKey {
  double value = 0;
  int a = 0, b = 0;
  static SepKey make(double v, int i, int j) { return {v, std::min(i, j), std::max(i, j)}; }
  auto operator<=>(const SepKey&) const = default;
};

class DistanceFamily {
 public:
  virtual ~DistanceFamily() = default;

  virtual std::string tag() const = 0;
  virtual int dim() const = 0;
  virtual int size() const = 0;

  virtual double eval(int id, const Point& q) const = 0;
  virtual double growth(int id, double y) const = 0;
  virtual double growth_constant() const = 0;
  virtual int sketch_constant() const = 0;
  // Multiplier applied to (8n/delta)^c_sk when sizing the separation factor N.
  virtual double sketch_multiplier() const = 0;
  virtual double sublevel_nonempty_threshold(int id) const = 0;
  virtual double lipschitz(int id) const = 0;

  // Bounding box of f^-1(<= y); only called for y >= threshold.
  virtual Box sublevel_bbox(int id, double y) const = 0;
  virtual Point sublevel_witness(int id, double y) const = 0;
  // Box holding every level-k cell that cell_keep accepts at level y.
  virtual Box cover_bbox(int id, double y, int level) const;
  // Grid-approximation rule for a closed cell at level y.
  virtual bool cell_keep(int id, double y, const Box& cell) const = 0;
  virtual EvalBounds eval_bounds(int id, const Box& b) const = 0;
  // Status of the level-k cover at level y restricted to the cells inside q (k > q.level).
  virtual BoxStatus fine_status(int id, double y, int level, const CanonicalCell& q) const = 0;

  virtual double pairwise_sep(int a, int b) const = 0;
  virtual bool sublevels_intersect(int a, int b, double y) const;

  virtual SketchResult sketch(std::span<const int> ids, double delta, double cr_bound) const = 0;

  // Non-null when every function is w*|q-p|+a, enabling the batched scan kernel.
  virtual const SoaSites* soa() const { return nullptr; }

  BoxStatus box_status(int id, double y, int level, const CanonicalCell& q) const;
};

double sep_point(const DistanceFamily& f, int id, const Point& q);
double sep_sets(const DistanceFamily& f, std::span<const int> a, std::span<const int> b);

struct MinResult {
  int id = -1;
  double value = 0;
};
// Exact argmin over ids (ties by id).
MinResult scan_ids(const DistanceFamily& f, std::span<const int> ids, const Point& q);
// Exact argmin over the whole family; uses the batched kernel when available.
MinResult scan_all(const DistanceFamily& f, const Point& q);

// Grid cells that cell_keep retains for the sublevel set, at level grid_level_clamped(r).
std::vector<CanonicalCell> sublevel_cells(const DistanceFamily& f, int id, double y, double r);
int cover_level(const DistanceFamily& f, int id, double y, double eps);

struct PropertyResult {
  std::string name;
  bool pass = true;
  int samples = 0;
  std::string counterexample;
};

struct FamilyReport {
  std::vector<PropertyResult> properties;
  bool all_pass() const;
};

FamilyReport validate_family(const DistanceFamily& f, int budget, uint64_t seed);

}  // namespace genvor
