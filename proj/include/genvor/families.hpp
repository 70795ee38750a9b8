#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "genvor/family.hpp"

namespace genvor {

// ---- mult_offset: f_i(q) = w_i |q - p_i| + a_i

struct MultOffsetSite {
  Point p;
  double w = 1;
  double a = 0;
};

double mo_pairwise_sep(const MultOffsetSite& si, const MultOffsetSite& sj);
// For w_i <= w_j: smallest y with ball_j(y) inside ball_i((1+delta)y).
double mo_containment_threshold(const MultOffsetSite& si, const MultOffsetSite& sj, double delta);
bool mo_ball_contained(const MultOffsetSite& si, const MultOffsetSite& sj, double y, double delta);

class MultOffsetFamily : public DistanceFamily {
 public:
  explicit MultOffsetFamily(std::vector<MultOffsetSite> sites);

  const std::vector<MultOffsetSite>& sites() const { return sites_; }

  std::string tag() const override { return "mult_offset"; }
  int dim() const override { return d_; }
  int size() const override { return static_cast<int>(sites_.size()); }
  double eval(int id, const Point& q) const override;
  double growth(int id, double y) const override;
  double growth_constant() const override { return 2; }
  int sketch_constant() const override { return d_; }
  double sketch_multiplier() const override { return 3; }
  double sublevel_nonempty_threshold(int id) const override { return sites_[id].a; }
  double lipschitz(int id) const override { return sites_[id].w; }
  Box sublevel_bbox(int id, double y) const override;
  Point sublevel_witness(int id, double) const override { return sites_[id].p; }
  bool cell_keep(int id, double y, const Box& cell) const override;
  EvalBounds eval_bounds(int id, const Box& b) const override;
  BoxStatus fine_status(int id, double y, int level, const CanonicalCell& q) const override;
  double pairwise_sep(int a, int b) const override { return mo_pairwise_sep(sites_[a], sites_[b]); }
  bool sublevels_intersect(int a, int b, double y) const override;
  SketchResult sketch(std::span<const int> ids, double delta, double cr_bound) const override;
  const SoaSites* soa() const override { return &soa_; }

 private:
  int d_ = 0;
  std::vector<MultOffsetSite> sites_;
  SoaSites soa_;
};

// ---- scaling2d: scaling distance of alpha-rounded fat polygons

struct FatBody2D {
  Point center;
  std::vector<Point> boundary;  // counterclockwise, star-shaped about center
  double r = 0;                 // distance from center to the boundary
  double outer = 0;             // max vertex distance from center
  double alpha = 0;
  double diam = 0;
  bool convex = false;
  // Per edge i (boundary[i] -> boundary[i+1]): outward unit normal and distance of its line from center.
  std::vector<Point> normal;
  std::vector<double> h;
  // Vertex angles about the center, rotated to start at the smallest, increasing.
  std::vector<double> angle;
  int angle_start = 0;
};

struct FatCheck {
  bool ok = false;
  double r = 0, alpha = 0;
  Point violation;
  std::string reason;
};

class BodyRejected : public std::runtime_error {
 public:
  BodyRejected(const std::string& what, Point at) : std::runtime_error(what), at_(at) {}
  const Point& at() const { return at_; }

 private:
  Point at_;
};

// Builds the cached geometry; throws BodyRejected for non-star-shaped input, and for non-fat input
// unless check_fat is false (negative controls only).
FatBody2D make_fat_body(const Point& center, std::vector<Point> polygon, bool check_fat = true);
FatCheck fat_check(const FatBody2D& body);
std::vector<Point> ellipse_polygon(const Point& center, double a, double b, double angle, int k = 64);
double scale_distance(const FatBody2D& body, const Point& q);
// Closed square [lo,hi] against the body scaled by y about its center.
bool body_meets_box(const FatBody2D& body, double y, const Box& b);
bool bodies_meet(const FatBody2D& a, const FatBody2D& b, double y);
double fat_pairwise_sep(const FatBody2D& a, const FatBody2D& b);

class ScalingFamily : public DistanceFamily {
 public:
  explicit ScalingFamily(std::vector<FatBody2D> bodies);

  const std::vector<FatBody2D>& bodies() const { return bodies_; }
  double sketch_const() const { return sketch_c_; }

  std::string tag() const override { return "scaling2d"; }
  int dim() const override { return 2; }
  int size() const override { return static_cast<int>(bodies_.size()); }
  double eval(int id, const Point& q) const override { return scale_distance(bodies_[id], q); }
  double growth(int id, double y) const override;
  double growth_constant() const override { return zeta_; }
  int sketch_constant() const override { return 2; }
  double sketch_multiplier() const override { return sketch_c_ * max_alpha_ * max_alpha_ * max_alpha_; }
  double sublevel_nonempty_threshold(int) const override { return 0; }
  double lipschitz(int id) const override { return 1 / bodies_[id].r; }
  Box sublevel_bbox(int id, double y) const override;
  Point sublevel_witness(int id, double) const override { return bodies_[id].center; }
  bool cell_keep(int id, double y, const Box& cell) const override;
  EvalBounds eval_bounds(int id, const Box& b) const override;
  BoxStatus fine_status(int id, double y, int level, const CanonicalCell& q) const override;
  double pairwise_sep(int a, int b) const override;
  bool sublevels_intersect(int a, int b, double y) const override;
  SketchResult sketch(std::span<const int> ids, double delta, double cr_bound) const override;

 private:
  std::vector<FatBody2D> bodies_;
  double zeta_ = 0;
  double max_alpha_ = 1;
  double sketch_c_ = 8;
};

// ---- nearest_furthest: F_i(q) = max over the reduced set S_i of |q - s|

struct MebResult {
  Point center;
  double radius = 0;  // covering radius of `center`
  double lower = 0;   // radius of the exact ball of the coreset
  std::vector<Point> coreset;
};

// Farthest-point coreset iteration, capped at ceil(2/mu) rounds.
MebResult meb_coreset(std::span<const Point> pts, double mu);
// Same iteration run to a relative gap of 1e-12.
MebResult meb_tight(std::span<const Point> pts);
// Exact minimum enclosing ball by move-to-front recursion; meant for small inputs.
Ball min_ball_small(std::span<const Point> pts);

struct UncertainSet {
  std::vector<Point> points;
  std::vector<Point> reduced;
  Point core_center;
  double core_radius = 0;
  Point meb_center;
  double meb_radius = 0;
};

UncertainSet make_uncertain_set(std::vector<Point> pts, double eps);
double fn_distance(const UncertainSet& u, const Point& q);
double fn_pairwise_sep(const UncertainSet& a, const UncertainSet& b);

class FurthestFamily : public DistanceFamily {
 public:
  FurthestFamily(std::vector<std::vector<Point>> sets, double eps);

  const std::vector<UncertainSet>& sets() const { return sets_; }
  double eps() const { return eps_; }

  std::string tag() const override { return "nearest_furthest"; }
  int dim() const override { return d_; }
  int size() const override { return static_cast<int>(sets_.size()); }
  double eval(int id, const Point& q) const override { return fn_distance(sets_[id], q); }
  double growth(int, double y) const override { return y; }
  double growth_constant() const override { return 2; }
  int sketch_constant() const override { return d_; }
  double sketch_multiplier() const override { return 4; }
  double sublevel_nonempty_threshold(int id) const override { return sets_[id].meb_radius; }
  double lipschitz(int) const override { return 1; }
  Box sublevel_bbox(int id, double y) const override;
  Point sublevel_witness(int id, double) const override { return sets_[id].meb_center; }
  Box cover_bbox(int id, double y, int level) const override;
  bool cell_keep(int id, double y, const Box& cell) const override;
  EvalBounds eval_bounds(int id, const Box& b) const override;
  BoxStatus fine_status(int id, double y, int level, const CanonicalCell& q) const override;
  double pairwise_sep(int a, int b) const override { return fn_pairwise_sep(sets_[a], sets_[b]); }
  SketchResult sketch(std::span<const int> ids, double delta, double cr_bound) const override;

 private:
  Box ball_box_intersection(int id, double radius) const;
  int d_ = 0;
  double eps_ = 0;
  std::vector<UncertainSet> sets_;
};

}  // namespace genvor
