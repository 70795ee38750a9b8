#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "genvor/clustering.hpp"
#include "genvor/families.hpp"
#include "genvor/family.hpp"

namespace genvor::oracle {

struct Check {
  std::string name;
  bool pass = true;
  std::string detail;
};

struct OracleReport {
  std::string digest;
  std::vector<Check> checks;
  double worst_ratio = 1;
  bool all_pass() const;
};

// Linear scan argmin over every function, ties to the smaller id.
MinResult exact_min(const DistanceFamily& f, const Point& q);

// Smallest y where the fine covers of both sublevel sets share a cell, by bisection.
// Throws std::runtime_error if the initial bracket does not hold.
double bisect_sep(const DistanceFamily& f, int a, int b, double tol);
// Do the level-k covers of a and b at level y share a cell?
bool covers_meet(const DistanceFamily& f, int a, int b, double y, int level);

constexpr size_t kExactGuard = 1u << 10;
// Pairs merged when pairwise_sep <= level; refuses more than kExactGuard ids.
Partition exact_ccs(const DistanceFamily& f, std::span<const int> ids, double level);
// Longest edge of the minimum spanning tree under pairwise_sep.
double exact_cr(const DistanceFamily& f, std::span<const int> ids);

// Exact minimum enclosing ball of at most 64 points (randomized incremental).
Ball exact_meb(std::span<const Point> pts, uint64_t seed = 1);

// Smallest t with q inside t*O by crossing-number membership.
double scale_distance_bisect(const FatBody2D& body, const Point& q);
bool polygon_contains(const std::vector<Point>& poly, const Point& q);

}  // namespace genvor::oracle
