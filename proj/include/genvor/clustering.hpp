#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "genvor/family.hpp"

namespace genvor {

struct Partition {
  // Each part sorted; parts ordered by their smallest id.
  std::vector<std::vector<int>> parts;

  size_t size() const { return parts.size(); }
  void canonicalize();
  std::vector<int> ground() const;
  static Partition singletons(std::span<const int> ids);
  bool operator==(const Partition& o) const = default;
};

// For a coarse partition over a finer one: coarse part i -> indices of the fine parts it is made of.
struct RefinementMap {
  std::vector<std::vector<int>> fine_of;
};

bool refines(const Partition& fine, const Partition& coarse);
// Throws std::invalid_argument when `fine` does not refine `coarse`.
RefinementMap refinement_map(const Partition& fine, const Partition& coarse);

struct ClusterInfo {
  Partition partition;
  double level = 0;
  double eps = 0;
  double cr_bound() const { return (1 + eps) * level; }
};

// Grid + union-find clustering; `atoms` (if given) are unioned up front so they refine the output.
Partition approx_clustering(const DistanceFamily& f, std::span<const int> ids, double eps, double level,
                            const Partition* atoms = nullptr);
ClusterInfo approx_clustering_info(const DistanceFamily& f, std::span<const int> ids, double eps, double level,
                                   const Partition* atoms = nullptr);

double connectivity_level_exact(const DistanceFamily& f, std::span<const int> ids);
// Exact for small sets, else 2x the smallest power-of-two level at which the clustering is one part.
double connectivity_upper_bound(const DistanceFamily& f, std::span<const int> ids);

double sep_connect(const DistanceFamily& f, int a, int b);

struct SplitStats {
  uint64_t calls = 0;
  uint64_t attempts = 0;
  uint64_t fallbacks = 0;
};

bool is_splitting(const DistanceFamily& f, std::span<const int> ids, const Partition& current, double x);
double splitting_distance(const DistanceFamily& f, std::span<const int> ids, const Partition& current, uint64_t seed,
                          SplitStats* stats = nullptr);

}  // namespace genvor
