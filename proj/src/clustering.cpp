#include "genvor/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "genvor/rng.hpp"

namespace genvor {

void Partition::canonicalize() {
  for (auto& p : parts) std::sort(p.begin(), p.end());
  parts.erase(std::remove_if(parts.begin(), parts.end(), [](const auto& p) { return p.empty(); }), parts.end());
  std::sort(parts.begin(), parts.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
}

std::vector<int> Partition::ground() const {
  std::vector<int> g;
  for (const auto& p : parts) g.insert(g.end(), p.begin(), p.end());
  std::sort(g.begin(), g.end());
  return g;
}

Partition Partition::singletons(std::span<const int> ids) {
  Partition p;
  for (int id : ids) p.parts.push_back({id});
  p.canonicalize();
  return p;
}

RefinementMap refinement_map(const Partition& fine, const Partition& coarse) {
  std::unordered_map<int, int> owner;
  for (size_t i = 0; i < coarse.parts.size(); ++i)
    for (int id : coarse.parts[i]) owner[id] = static_cast<int>(i);
  RefinementMap m;
  m.fine_of.resize(coarse.parts.size());
  size_t covered = 0;
  for (size_t j = 0; j < fine.parts.size(); ++j) {
    const auto& p = fine.parts[j];
    auto it = owner.find(p.front());
    if (it == owner.end()) throw std::invalid_argument("refinement_map: id missing from coarse partition");
    for (int id : p) {
      auto jt = owner.find(id);
      if (jt == owner.end() || jt->second != it->second) throw std::invalid_argument("refinement_map: not a refinement");
    }
    m.fine_of[it->second].push_back(static_cast<int>(j));
    covered += p.size();
  }
  if (covered != owner.size()) throw std::invalid_argument("refinement_map: ground sets differ");
  return m;
}

bool refines(const Partition& fine, const Partition& coarse) {
  try {
    refinement_map(fine, coarse);
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

namespace {

struct UnionFind {
  std::vector<int> p;
  explicit UnionFind(size_t n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) {
    while (p[x] != x) x = p[x] = p[p[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a), b = find(b);
    if (a != b) p[std::max(a, b)] = std::min(a, b);
  }
};

Partition from_uf(UnionFind& uf, std::span<const int> ids) {
  std::unordered_map<int, size_t> slot;
  Partition out;
  for (size_t i = 0; i < ids.size(); ++i) {
    int r = uf.find(static_cast<int>(i));
    auto [it, fresh] = slot.emplace(r, out.parts.size());
    if (fresh) out.parts.emplace_back();
    out.parts[it->second].push_back(ids[i]);
  }
  out.canonicalize();
  return out;
}

}  // namespace

Partition approx_clustering(const DistanceFamily& f, std::span<const int> ids, double eps, double level,
                            const Partition* atoms) {
  if (!(eps > 0)) throw std::invalid_argument("approx_clustering: eps must be positive");
  if (!(level >= 0)) throw std::invalid_argument("approx_clustering: level must be non-negative");
  std::unordered_map<int, int> pos;
  for (size_t i = 0; i < ids.size(); ++i) pos[ids[i]] = static_cast<int>(i);
  UnionFind uf(ids.size());
  if (atoms) {
    for (const auto& part : atoms->parts) {
      auto a = pos.find(part.front());
      if (a == pos.end()) throw std::invalid_argument("approx_clustering: atom outside id set");
      for (int id : part) {
        auto b = pos.find(id);
        if (b == pos.end()) throw std::invalid_argument("approx_clustering: atom outside id set");
        uf.unite(a->second, b->second);
      }
    }
  }
  if (level == 0) return from_uf(uf, ids);

  std::unordered_map<CanonicalCell, int, CellHash> owner;
  std::vector<std::pair<CanonicalCell, int>> all;
  uint64_t level_mask = 0;
  for (size_t i = 0; i < ids.size(); ++i) {
    int id = ids[i];
    if (f.sublevel_nonempty_threshold(id) > level) continue;
    for (const auto& c : sublevel_cells(f, id, level, eps * f.growth(id, level))) {
      auto [it, fresh] = owner.emplace(c, static_cast<int>(i));
      if (!fresh) uf.unite(it->second, static_cast<int>(i));
      all.emplace_back(c, static_cast<int>(i));
      level_mask |= uint64_t{1} << c.level;
    }
  }
  for (const auto& [c, i] : all) {
    for (int k = 0; k < c.level; ++k) {
      if (!(level_mask >> k & 1)) continue;
      auto it = owner.find(ancestor(c, k));
      if (it != owner.end()) uf.unite(it->second, i);
    }
  }
  return from_uf(uf, ids);
}

ClusterInfo approx_clustering_info(const DistanceFamily& f, std::span<const int> ids, double eps, double level,
                                   const Partition* atoms) {
  return {approx_clustering(f, ids, eps, level, atoms), level, eps};
}

double connectivity_level_exact(const DistanceFamily& f, std::span<const int> ids) {
  size_t m = ids.size();
  if (m <= 1) return 0;
  // Prim over the complete graph, ordering edges by the perturbed key.
  std::vector<char> in(m, 0);
  std::vector<SepKey> best(m);
  std::vector<char> has(m, 0);
  in[0] = 1;
  for (size_t j = 1; j < m; ++j) best[j] = SepKey::make(f.pairwise_sep(ids[0], ids[j]), ids[0], ids[j]), has[j] = 1;
  double cr = 0;
  for (size_t step = 1; step < m; ++step) {
    size_t pick = m;
    for (size_t j = 0; j < m; ++j)
      if (!in[j] && (pick == m || best[j] < best[pick])) pick = j;
    in[pick] = 1;
    cr = std::max(cr, best[pick].value);
    for (size_t j = 0; j < m; ++j) {
      if (in[j]) continue;
      SepKey k = SepKey::make(f.pairwise_sep(ids[pick], ids[j]), ids[pick], ids[j]);
      if (k < best[j]) best[j] = k;
    }
  }
  return cr;
}

double connectivity_upper_bound(const DistanceFamily& f, std::span<const int> ids) {
  if (ids.size() <= 1) return 0;
  if (ids.size() <= 256) return connectivity_level_exact(f, ids);
  // All sublevel sets at level max_i f_i(c) contain c, so the union is connected there.
  Point c(f.dim());
  for (int i = 0; i < f.dim(); ++i) c[i] = 0.5;
  double bound = 0;
  for (int id : ids) bound = std::max(bound, f.eval(id, c));
  double x = std::ldexp(1.0, std::ilogb(bound) + 1);
  double last_single = x;
  for (int t = 0; t < 80; ++t) {
    double y = 0.5 * x;
    if (approx_clustering(f, ids, 1.0, y).size() != 1) break;
    last_single = x = y;
  }
  // A one-part clustering at l means one component of the exact clustering at 2l.
  return std::min(bound, 2 * last_single);
}

double sep_connect(const DistanceFamily& f, int a, int b) {
  if (a == b) throw std::invalid_argument("sep_connect: ids must differ");
  double alpha = f.pairwise_sep(a, b);
  if (!(alpha > 0)) return std::ldexp(1.0, -40);
  double x = std::ldexp(1.0, std::ilogb(alpha / 4));
  if (x < alpha / 4) x *= 2;
  int ids[2] = {a, b};
  for (int t = 0; t < 8; ++t, x *= 2)
    if (approx_clustering(f, ids, 1.0, x).size() == 1) return x;
  throw std::logic_error("sep_connect: pair failed to merge above its distance");
}

bool is_splitting(const DistanceFamily& f, std::span<const int> ids, const Partition& current, double x) {
  size_t m = current.size();
  size_t low = approx_clustering(f, ids, 1.0, x / 4, &current).size();
  size_t high = approx_clustering(f, ids, 1.0, x, &current).size();
  return 4 * low >= m && 8 * high <= 7 * m;
}

namespace {

double cluster_radius(const DistanceFamily& f, const std::vector<int>& part, const std::vector<int>& ids,
                      const std::vector<char>& inside) {
  double r = INFINITY;
  for (size_t j = 0; j < ids.size(); ++j) {
    if (inside[j]) continue;
    for (int a : part) r = std::min(r, f.pairwise_sep(a, ids[j]));
  }
  // Coincident functions: the perturbed distance is positive but below any grid scale used here.
  return r > 0 ? r : std::ldexp(1.0, -40);
}

}  // namespace

double splitting_distance(const DistanceFamily& f, std::span<const int> ids_in, const Partition& current,
                          uint64_t seed, SplitStats* stats) {
  size_t m = current.size();
  if (m < 2) throw std::invalid_argument("splitting_distance: need at least two clusters");
  std::vector<int> ids(ids_in.begin(), ids_in.end());
  std::unordered_map<int, size_t> pos;
  for (size_t i = 0; i < ids.size(); ++i) pos[ids[i]] = i;
  auto mask_of = [&](const std::vector<int>& part) {
    std::vector<char> in(ids.size(), 0);
    for (int id : part) in[pos.at(id)] = 1;
    return in;
  };
  if (stats) ++stats->calls;
  Rng rng(seed);
  for (int attempt = 0; attempt < 64; ++attempt) {
    if (stats) ++stats->attempts;
    const auto& part = current.parts[rng.below(m)];
    double x = cluster_radius(f, part, ids, mask_of(part));
    if (is_splitting(f, ids, current, x)) return x;
  }
  if (stats) ++stats->fallbacks;
  std::vector<double> rs;
  for (const auto& part : current.parts) rs.push_back(cluster_radius(f, part, ids, mask_of(part)));
  std::sort(rs.begin(), rs.end());
  double x = rs[m / 2];
  if (!is_splitting(f, ids, current, x)) throw std::logic_error("splitting_distance: median fallback failed");
  return x;
}

}  // namespace genvor
