#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "genvor/family.hpp"
#include "genvor/quadtree.hpp"

namespace genvor {

struct NearDecider {
  CompressedQuadtree tree;
  double alpha = 0;
  double eps = 0;
  std::vector<int> ids;
};

struct NearResult {
  bool yes = false;
  int id = -1;
};

NearDecider near_build(const DistanceFamily& f, std::span<const int> ids, double alpha, double eps);
// Outside the unit cube the answer comes from an exact scan.
NearResult near_query(const DistanceFamily& f, const NearDecider& dec, const Point& q);

enum class IntervalKind : int32_t { Below = 0, Within = 1, Above = 2 };

struct IntervalResult {
  IntervalKind kind = IntervalKind::Above;
  int id = -1;
  // Witness of the overlaid near decider for Below answers (-1 if it said No or none was overlaid).
  int near_id = -1;
  // Candidate list index for pooled Within answers, -1 otherwise.
  int pool = -1;
};

struct IntervalBuildStats {
  uint64_t boxes = 0;
  uint64_t leaves = 0;
  uint64_t forced = 0;
};

// Tree labels: id = witness, prio = IntervalKind, y = near witness (as a number, -1 if none).
struct IntervalStructure {
  double alpha = 0, beta = 0, eps = 0;
  int rungs = 0;  // L; rungs are 0..L
  std::vector<int> ids;
  CompressedQuadtree tree;
  bool refined = false;
  // With pool_cap > 0 a Within box whose plausible winners number at most pool_cap keeps them as a
  // list (label id = list index) and the answer is their argmin; 0 reproduces the first-rung witness.
  int pool_cap = 0;
  std::vector<std::vector<int>> pools;
  // With below_limit > alpha a box owned by one function g whose values over the box stay
  // below below_limit may answer Below(g) throughout (search use: the caller only needs g(q) < x/4).
  double below_limit = 0;
  IntervalBuildStats stats;

  double rung(int i) const;
};

struct IntervalOptions {
  const NearDecider* refine = nullptr;  // overlaid into Below answers
  int pool_cap = 0;
  double below_limit = 0;
};

IntervalStructure interval_build(const DistanceFamily& f, std::span<const int> ids, double alpha, double beta,
                                 double eps, const IntervalOptions& opt = {});
IntervalResult interval_query(const DistanceFamily& f, const IntervalStructure& s, const Point& q);
IntervalResult interval_decode(const Label& l);
// Decodes a located label, resolving pooled Within answers at q.
IntervalResult interval_answer(const DistanceFamily& f, const IntervalStructure& s, const Label& l, const Point& q);
int interval_rung_count(double alpha, double beta, double eps);
double interval_rung(double alpha, double eps, int i);

// Literal rung decider D_i and the sequential first-yes scan over all rungs (reference semantics).
NearDecider interval_rung_decider(const DistanceFamily& f, const IntervalStructure& s, int i);
IntervalResult interval_sequential(const DistanceFamily& f, const IntervalStructure& s,
                                   std::span<const NearDecider> rungs, const Point& q,
                                   const NearDecider* refine = nullptr);

}  // namespace genvor
