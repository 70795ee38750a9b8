#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "genvor/bytes.hpp"
#include "genvor/clustering.hpp"
#include "genvor/deciders.hpp"
#include "genvor/family.hpp"
#include "genvor/quadtree.hpp"

namespace genvor {

struct SearchParams {
  double eps = 0;
  int n = 0;
  int depth_bound = 0;  // h = ceil(log_{8/7} n) + 2
  double delta = 0;     // eps / (8h)
  double log2_N = 0;
  double N = 0;
  int c_sk = 0;
};

SearchParams make_search_params(const DistanceFamily& f, double eps);

struct ValidSketch {
  std::vector<int> members;
  double valid_from = 0;
};

struct SearchNode {
  bool leaf = true;
  int depth = 0;
  std::vector<int> ground;  // functions of this subproblem
  // Leaf
  ValidSketch leaf_sketch;
  // Internal
  double x = 0;
  IntervalStructure interval;
  std::vector<std::pair<int, int>> below_of;  // (function id, below child) sorted by id
  std::vector<int> below;
  int above = -1;
  int partition_size = 0;

  int below_child(int id) const;
};

struct SearchStats {
  SplitStats split;
  uint64_t internal_nodes = 0;
  uint64_t leaves = 0;
  uint64_t validity_violations = 0;
  uint64_t stalled_above = 0;
  uint64_t interval_nodes = 0;
  uint64_t forced_leaves = 0;
  int depth = 0;
  double build_ms = 0;
};

struct QueryAnswer {
  int id = -1;
  double value = 0;
  int locates = 0;
  bool outside = false;
};

struct BuildHooks {
  // Margin applied to the interval and leaf-sketch eps; a value != 1 builds a deliberately broken structure.
  double eps_scale = 1;
  // Candidate list cap for Within boxes of the interval structures (0 keeps single witnesses).
  int pool_cap = 8;
  // Called with (ground, current partition, x) for every splitting distance chosen.
  std::function<void(std::span<const int>, const Partition&, double)> on_split;
};

class SearchTree {
 public:
  static SearchTree build(const DistanceFamily& f, double eps, uint64_t seed, const BuildHooks& hooks = {});

  QueryAnswer query(const DistanceFamily& f, const Point& q) const;
  // Answer for a point outside the unit cube (shared with the flattened structure).
  QueryAnswer query_outside(const DistanceFamily& f, const Point& q) const;

  const SearchParams& params() const { return params_; }
  const SearchStats& stats() const { return stats_; }
  const std::vector<SearchNode>& nodes() const { return nodes_; }
  const ValidSketch& root_sketch() const { return root_sketch_; }
  uint64_t seed() const { return seed_; }
  int dim() const { return d_; }
  size_t total_interval_nodes() const;

  void write(Writer& w) const;
  static SearchTree read(Reader& r);

 private:
  friend class SearchBuilder;
  int d_ = 0;
  uint64_t seed_ = 0;
  SearchParams params_;
  SearchStats stats_;
  std::vector<SearchNode> nodes_;
  ValidSketch root_sketch_;
};

// Resketch the union of cluster sketches at delta; valid_from >= floor_y and every input's valid_from.
ValidSketch resketch(const DistanceFamily& f, std::span<const ValidSketch> parts, double delta, double floor_y,
                     double cr_bound);

struct AvdRegion {
  CanonicalCell outer;
  bool has_inner = false;
  CanonicalCell inner;
  int sketch = -1;
};

class Avd {
 public:
  static Avd flatten(const SearchTree& t);

  QueryAnswer query(const DistanceFamily& f, const SearchTree& t, const Point& q) const;
  const CompressedQuadtree& tree() const { return tree_; }
  const std::vector<std::vector<int>>& sketches() const { return sketches_; }
  std::vector<AvdRegion> regions() const;
  size_t node_count() const { return tree_.node_count(); }

  void write(Writer& w) const;
  static Avd read(Reader& r);

 private:
  CompressedQuadtree tree_;
  std::vector<std::vector<int>> sketches_;
};

}  // namespace genvor
