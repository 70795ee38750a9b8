#include "genvor/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_map>

namespace genvor {

SearchParams make_search_params(const DistanceFamily& f, double eps) {
  if (!(eps > 0 && eps <= 1)) throw std::invalid_argument("search: eps must lie in (0,1]");
  if (f.size() < 1) throw std::invalid_argument("search: empty family");
  SearchParams p;
  p.eps = eps;
  p.n = f.size();
  p.depth_bound = static_cast<int>(std::ceil(std::log(static_cast<double>(p.n)) / std::log(8.0 / 7.0) - 1e-12)) + 2;
  p.delta = eps / (8 * p.depth_bound);
  p.c_sk = f.sketch_constant();
  double l = std::log2(f.sketch_multiplier()) + p.c_sk * std::log2(8.0 * p.n / p.delta);
  p.log2_N = std::clamp(l, 10.0, 200.0);
  p.N = std::exp2(p.log2_N);
  return p;
}

int SearchNode::below_child(int id) const {
  auto it = std::lower_bound(below_of.begin(), below_of.end(), std::pair{id, -1});
  if (it == below_of.end() || it->first != id) return -1;
  return it->second;
}

size_t SearchTree::total_interval_nodes() const {
  size_t s = 0;
  for (const auto& n : nodes_)
    if (!n.leaf) s += n.interval.tree.node_count();
  return s;
}

namespace {

uint64_t splitmix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr size_t kExactCrLimit = 512;

std::vector<int> sorted_union(std::span<const ValidSketch> parts) {
  std::vector<int> u;
  for (const auto& p : parts) u.insert(u.end(), p.members.begin(), p.members.end());
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  return u;
}

}  // namespace

ValidSketch resketch(const DistanceFamily& f, std::span<const ValidSketch> parts, double delta, double floor_y,
                     double cr_bound) {
  if (parts.empty()) throw std::invalid_argument("resketch: no input sketches");
  std::vector<int> all = sorted_union(parts);
  SketchResult sk = f.sketch(all, delta, cr_bound);
  ValidSketch out;
  out.members = std::move(sk.members);
  out.valid_from = std::max(floor_y, sk.y0);
  for (const auto& p : parts) out.valid_from = std::max(out.valid_from, p.valid_from);
  return out;
}

struct Part {
  std::vector<int> members;
  ValidSketch sketch;
};

class SearchBuilder {
 public:
  SearchBuilder(const DistanceFamily& f, SearchTree& t, const BuildHooks& hooks) : f_(f), t_(t), hooks_(hooks) {}

  int node(std::vector<Part> parts, int depth) {
    int idx = static_cast<int>(t_.nodes_.size());
    t_.nodes_.emplace_back();
    t_.stats_.depth = std::max(t_.stats_.depth, depth);
    SearchNode nd;
    nd.depth = depth;
    nd.partition_size = static_cast<int>(parts.size());
    for (const auto& p : parts) nd.ground.insert(nd.ground.end(), p.members.begin(), p.members.end());
    std::sort(nd.ground.begin(), nd.ground.end());
    const SearchParams& P = t_.params_;

    if (parts.size() == 1) {
      const ValidSketch& s = parts[0].sketch;
      SketchResult sk = f_.sketch(s.members, std::min(1.0, P.eps * hooks_.eps_scale) / 8, cr_of(s.members, s.valid_from));
      nd.leaf = true;
      nd.leaf_sketch.members = sk.members;
      nd.leaf_sketch.valid_from = std::max(s.valid_from, sk.y0);
      ++t_.stats_.leaves;
      t_.nodes_[idx] = std::move(nd);
      return idx;
    }

    nd.leaf = false;
    ++t_.stats_.internal_nodes;
    Partition current;
    std::vector<ValidSketch> sketches;
    for (const auto& p : parts) current.parts.push_back(p.members), sketches.push_back(p.sketch);
    current.canonicalize();
    uint64_t seed = splitmix(t_.seed_ ^ splitmix(static_cast<uint64_t>(idx) + 1));
    double x = splitting_distance(f_, nd.ground, current, seed, &t_.stats_.split);
    nd.x = x;
    if (hooks_.on_split) hooks_.on_split(nd.ground, current, x);
    double alpha = x / (8 * P.N), beta = 8 * P.N * P.N * x;
    for (const auto& p : parts)
      if (p.sketch.valid_from > alpha) ++t_.stats_.validity_violations;

    std::vector<int> H = sorted_union(sketches);
    NearDecider near = near_build(f_, H, x / 8, 1.0);
    double ieps = std::min(1.0, P.eps * hooks_.eps_scale);
    IntervalOptions io;
    io.refine = &near;
    io.pool_cap = hooks_.pool_cap;
    if (hooks_.pool_cap > 0) io.below_limit = x / 8;
    nd.interval = interval_build(f_, H, alpha, beta, ieps, io);
    t_.stats_.interval_nodes += nd.interval.tree.node_count();
    t_.stats_.forced_leaves += nd.interval.stats.forced;

    // Below: clusters of the ground set at x/4, each keeping its parts untouched.
    Partition below = approx_clustering(f_, nd.ground, 1.0, x / 4, &current);
    std::unordered_map<int, int> cluster_of;
    for (size_t c = 0; c < below.parts.size(); ++c)
      for (int id : below.parts[c]) cluster_of[id] = static_cast<int>(c);
    std::vector<std::vector<Part>> groups(below.parts.size());
    for (auto& p : parts) groups[cluster_of.at(p.members.front())].push_back(p);

    // Above: clusters at xN, merged sketches resketched.
    Partition above = approx_clustering(f_, nd.ground, 1.0, x * P.N, &current);
    std::vector<Part> up;
    if (above.size() >= parts.size()) {
      ++t_.stats_.stalled_above;
      above.parts = {nd.ground};
    }
    {
      std::unordered_map<int, int> slot;
      for (size_t c = 0; c < above.parts.size(); ++c)
        for (int id : above.parts[c]) slot[id] = static_cast<int>(c);
      std::vector<std::vector<const Part*>> merged(above.parts.size());
      for (const auto& p : parts) merged[slot.at(p.members.front())].push_back(&p);
      for (size_t c = 0; c < merged.size(); ++c) {
        Part np;
        np.members = above.parts[c];
        if (merged[c].size() == 1) {
          np.sketch = merged[c][0]->sketch;
        } else {
          std::vector<ValidSketch> ins;
          double floor_cr = 2 * x * P.N;
          for (const Part* p : merged[c]) ins.push_back(p->sketch), floor_cr = std::max(floor_cr, p->sketch.valid_from);
          std::vector<int> uni = sorted_union(ins);
          np.sketch = resketch(f_, ins, P.delta, 0, cr_of(uni, (1 + P.delta) * floor_cr));
        }
        up.push_back(std::move(np));
      }
    }

    t_.nodes_[idx] = std::move(nd);
    std::vector<int> below_idx;
    for (auto& g : groups) below_idx.push_back(node(std::move(g), depth + 1));
    int above_idx = node(std::move(up), depth + 1);

    SearchNode& me = t_.nodes_[idx];
    me.below = below_idx;
    me.above = above_idx;
    for (size_t c = 0; c < below.parts.size(); ++c)
      for (int id : below.parts[c])
        if (std::binary_search(H.begin(), H.end(), id)) me.below_of.emplace_back(id, below_idx[c]);
    std::sort(me.below_of.begin(), me.below_of.end());
    return idx;
  }

  double cr_of(const std::vector<int>& ids, double fallback) const {
    if (ids.size() <= 1) return 0;
    if (ids.size() <= kExactCrLimit) return connectivity_level_exact(f_, ids);
    return fallback;
  }

 private:
  const DistanceFamily& f_;
  SearchTree& t_;
  BuildHooks hooks_;
};

SearchTree SearchTree::build(const DistanceFamily& f, double eps, uint64_t seed, const BuildHooks& hooks) {
  auto t0 = std::chrono::steady_clock::now();
  SearchTree t;
  t.d_ = f.dim();
  t.seed_ = seed;
  t.params_ = make_search_params(f, eps);
  std::vector<int> all(f.size());
  for (int i = 0; i < f.size(); ++i) all[i] = i;
  SketchResult rs = f.sketch(all, eps / 8, connectivity_upper_bound(f, all));
  t.root_sketch_ = {rs.members, rs.y0};

  std::vector<Part> parts;
  for (int i = 0; i < f.size(); ++i) parts.push_back({{i}, {{i}, 0}});
  SearchBuilder b(f, t, hooks);
  b.node(std::move(parts), 0);
  t.stats_.build_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return t;
}

QueryAnswer SearchTree::query_outside(const DistanceFamily& f, const Point& q) const {
  QueryAnswer a;
  a.outside = true;
  MinResult m = scan_ids(f, root_sketch_.members, q);
  // The sketch is only trusted where the true minimum is provably above its validity level.
  if (m.value >= (1 + params_.eps / 8) * root_sketch_.valid_from) {
    a.id = m.id, a.value = m.value;
    return a;
  }
  MinResult e = scan_all(f, q);
  a.id = e.id, a.value = e.value;
  return a;
}

QueryAnswer SearchTree::query(const DistanceFamily& f, const Point& q) const {
  if (q.d != d_) throw std::invalid_argument("query: dimension mismatch");
  if (!in_unit_cube(q)) return query_outside(f, q);
  QPoint qq = quantize(q);
  QueryAnswer a;
  int u = 0;
  while (true) {
    const SearchNode& nd = nodes_[u];
    if (nd.leaf) {
      MinResult m = scan_ids(f, nd.leaf_sketch.members, q);
      a.id = m.id, a.value = m.value;
      return a;
    }
    ++a.locates;
    auto lab = nd.interval.tree.locate(qq);
    if (!lab) {
      u = nd.above;
      continue;
    }
    IntervalResult r = interval_answer(f, nd.interval, *lab, q);
    if (r.kind == IntervalKind::Within) {
      a.id = r.id, a.value = f.eval(r.id, q);
      return a;
    }
    if (r.kind == IntervalKind::Above) {
      u = nd.above;
      continue;
    }
    int c = nd.below_child(r.near_id >= 0 ? r.near_id : r.id);
    if (c < 0) {
      a.id = r.id, a.value = f.eval(r.id, q);
      return a;
    }
    u = c;
  }
}

// ---------------------------------------------------------------- serialization

namespace {

constexpr uint32_t kTreeTag = 0x54535447;  // "GTST"

void write_ids(Writer& w, const std::vector<int>& v) {
  w.u64(v.size());
  for (int x : v) w.i32(x);
}

std::vector<int> read_ids(Reader& r) {
  uint64_t n = r.count(4);
  std::vector<int> v(n);
  for (auto& x : v) x = r.i32();
  return v;
}

void write_interval(Writer& w, const IntervalStructure& s) {
  w.f64(s.alpha), w.f64(s.beta), w.f64(s.eps);
  w.i32(s.rungs);
  w.u8(s.refined);
  w.u64(s.stats.boxes), w.u64(s.stats.leaves), w.u64(s.stats.forced);
  write_ids(w, s.ids);
  w.i32(s.pool_cap);
  w.f64(s.below_limit);
  w.u64(s.pools.size());
  for (const auto& p : s.pools) write_ids(w, p);
  s.tree.write(w);
}

IntervalStructure read_interval(Reader& r) {
  IntervalStructure s;
  s.alpha = r.f64(), s.beta = r.f64(), s.eps = r.f64();
  s.rungs = r.i32();
  s.refined = r.u8() != 0;
  s.stats.boxes = r.u64(), s.stats.leaves = r.u64(), s.stats.forced = r.u64();
  s.ids = read_ids(r);
  s.pool_cap = r.i32();
  s.below_limit = r.f64();
  uint64_t np = r.count(8);
  for (uint64_t i = 0; i < np; ++i) s.pools.push_back(read_ids(r));
  s.tree = CompressedQuadtree::read(r);
  if (s.pool_cap > 0)
    for (const auto& l : s.tree.labels())
      if (l.prio == static_cast<int32_t>(IntervalKind::Within) && (l.id < 0 || static_cast<uint64_t>(l.id) >= np))
        throw std::runtime_error("artifact: bad candidate list index");
  return s;
}

}  // namespace

void SearchTree::write(Writer& w) const {
  w.u32(kTreeTag);
  w.i32(d_);
  w.u64(seed_);
  w.f64(params_.eps), w.i32(params_.n), w.i32(params_.depth_bound), w.f64(params_.delta);
  w.f64(params_.log2_N), w.f64(params_.N), w.i32(params_.c_sk);
  w.u64(stats_.split.calls), w.u64(stats_.split.attempts), w.u64(stats_.split.fallbacks);
  w.u64(stats_.internal_nodes), w.u64(stats_.leaves), w.u64(stats_.validity_violations);
  w.u64(stats_.stalled_above), w.u64(stats_.interval_nodes), w.u64(stats_.forced_leaves);
  w.i32(stats_.depth);  // build time stays out so equal seeds give equal bytes
  write_ids(w, root_sketch_.members);
  w.f64(root_sketch_.valid_from);
  w.u64(nodes_.size());
  for (const auto& n : nodes_) {
    w.u8(n.leaf);
    w.i32(n.depth);
    w.i32(n.partition_size);
    write_ids(w, n.ground);
    if (n.leaf) {
      write_ids(w, n.leaf_sketch.members);
      w.f64(n.leaf_sketch.valid_from);
      continue;
    }
    w.f64(n.x);
    write_interval(w, n.interval);
    w.u64(n.below_of.size());
    for (auto [id, c] : n.below_of) w.i32(id), w.i32(c);
    write_ids(w, n.below);
    w.i32(n.above);
  }
}

SearchTree SearchTree::read(Reader& r) {
  if (r.u32() != kTreeTag) throw std::runtime_error("artifact: bad search tree tag");
  SearchTree t;
  t.d_ = r.i32();
  if (t.d_ < 1 || t.d_ > kMaxDim) throw std::runtime_error("artifact: bad dimension");
  t.seed_ = r.u64();
  auto& p = t.params_;
  p.eps = r.f64(), p.n = r.i32(), p.depth_bound = r.i32(), p.delta = r.f64();
  p.log2_N = r.f64(), p.N = r.f64(), p.c_sk = r.i32();
  auto& s = t.stats_;
  s.split.calls = r.u64(), s.split.attempts = r.u64(), s.split.fallbacks = r.u64();
  s.internal_nodes = r.u64(), s.leaves = r.u64(), s.validity_violations = r.u64();
  s.stalled_above = r.u64(), s.interval_nodes = r.u64(), s.forced_leaves = r.u64();
  s.depth = r.i32();
  t.root_sketch_.members = read_ids(r);
  t.root_sketch_.valid_from = r.f64();
  uint64_t count = r.count(1);
  t.nodes_.resize(count);
  for (auto& n : t.nodes_) {
    n.leaf = r.u8() != 0;
    n.depth = r.i32();
    n.partition_size = r.i32();
    n.ground = read_ids(r);
    if (n.leaf) {
      n.leaf_sketch.members = read_ids(r);
      n.leaf_sketch.valid_from = r.f64();
      continue;
    }
    n.x = r.f64();
    n.interval = read_interval(r);
    uint64_t b = r.count(8);
    for (uint64_t i = 0; i < b; ++i) {
      int id = r.i32();
      int c = r.i32();
      n.below_of.emplace_back(id, c);
    }
    n.below = read_ids(r);
    n.above = r.i32();
  }
  auto bad = [&](int c) { return c < 0 || static_cast<uint64_t>(c) >= count; };
  for (const auto& n : t.nodes_) {
    if (n.leaf) continue;
    if (bad(n.above)) throw std::runtime_error("artifact: bad child index");
    for (int c : n.below)
      if (bad(c)) throw std::runtime_error("artifact: bad child index");
    for (auto [id, c] : n.below_of)
      if (bad(c)) throw std::runtime_error("artifact: bad child index");
  }
  if (count == 0) throw std::runtime_error("artifact: empty search tree");
  return t;
}

// ---------------------------------------------------------------- flatten

Avd Avd::flatten(const SearchTree& t) {
  const auto& nodes = t.nodes();
  int d = t.dim();
  struct Entry {
    CanonicalCell cell;
    int src;
    Label label;
  };
  std::vector<Entry> entries;
  for (size_t u = 0; u < nodes.size(); ++u) {
    if (nodes[u].leaf) continue;
    for (const auto& lc : nodes[u].interval.tree.labeled_cells())
      entries.push_back({lc.cell, static_cast<int>(u), lc.label});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.cell == b.cell) return a.src < b.src;
    return zorder_less(a.cell, b.cell);
  });
  std::vector<CanonicalCell> cells;
  std::vector<size_t> start;
  for (size_t i = 0; i < entries.size(); ++i)
    if (i == 0 || !(entries[i].cell == entries[i - 1].cell)) cells.push_back(entries[i].cell), start.push_back(i);
  start.push_back(entries.size());
  CompressedQuadtree sk = CompressedQuadtree::skeleton(d, cells);

  Avd avd;
  std::map<std::vector<int>, int> table;
  auto sketch_index = [&](const std::vector<int>& members) {
    auto [it, fresh] = table.emplace(members, static_cast<int>(avd.sketches_.size()));
    if (fresh) avd.sketches_.push_back(members);
    return it->second;
  };
  auto within = [&](const SearchNode& nd, const IntervalResult& r) {
    return nd.interval.pool_cap > 0 ? sketch_index(nd.interval.pools.at(r.id)) : sketch_index({r.id});
  };
  std::vector<int32_t> cur(nodes.size(), -1);  // index into entries of the active label per source
  auto resolve = [&]() {
    int u = 0;
    while (true) {
      const SearchNode& nd = nodes[u];
      if (nd.leaf) return sketch_index(nd.leaf_sketch.members);
      if (cur[u] < 0) {
        u = nd.above;
        continue;
      }
      IntervalResult r = interval_decode(entries[cur[u]].label);
      if (r.kind == IntervalKind::Within) return within(nd, r);
      if (r.kind == IntervalKind::Above) {
        u = nd.above;
        continue;
      }
      int c = nd.below_child(r.near_id >= 0 ? r.near_id : r.id);
      if (c < 0) return sketch_index({r.id});
      u = c;
    }
  };

  std::vector<LabeledCell> out;
  struct Frame {
    uint32_t node;
    int parent_answer;
    size_t undo_mark;
    bool entered;
  };
  std::vector<std::pair<int, int32_t>> undo;
  std::vector<Frame> st{{0, -1, 0, false}};
  while (!st.empty()) {
    Frame& f = st.back();
    if (f.entered) {
      while (undo.size() > f.undo_mark) {
        auto [src, prev] = undo.back();
        undo.pop_back();
        cur[src] = prev;
      }
      st.pop_back();
      continue;
    }
    f.entered = true;
    f.undo_mark = undo.size();
    const auto& n = sk.node(f.node);
    if (n.label >= 0)
      for (size_t e = start[n.label]; e < start[n.label + 1]; ++e) {
        undo.emplace_back(entries[e].src, cur[entries[e].src]);
        cur[entries[e].src] = static_cast<int32_t>(e);
      }
    int ans = resolve();
    if (ans != f.parent_answer) out.push_back({n.cell, Label{ans, 0, 0}});
    uint32_t first = n.first_child, cnt = n.child_count;
    for (uint32_t j = first + cnt; j-- > first;) st.push_back({j, ans, 0, false});
  }
  avd.tree_ = CompressedQuadtree::build(d, out);
  return avd;
}

QueryAnswer Avd::query(const DistanceFamily& f, const SearchTree& t, const Point& q) const {
  if (q.d != tree_.dim()) throw std::invalid_argument("query: dimension mismatch");
  if (!in_unit_cube(q)) return t.query_outside(f, q);
  QueryAnswer a;
  a.locates = 1;
  auto lab = tree_.locate(quantize(q));
  if (!lab) throw std::logic_error("avd: point without a region");
  MinResult m = scan_ids(f, sketches_[lab->id], q);
  a.id = m.id, a.value = m.value;
  return a;
}

std::vector<AvdRegion> Avd::regions() const {
  std::vector<AvdRegion> out;
  struct Frame {
    uint32_t node;
    int label;
  };
  std::vector<Frame> st{{0, -1}};
  while (!st.empty()) {
    auto [u, inherited] = st.back();
    st.pop_back();
    const auto& n = tree_.node(u);
    int lab = n.label >= 0 ? tree_.labels()[n.label].id : inherited;
    if (n.child_count == 0) {
      out.push_back({n.cell, false, {}, lab});
      continue;
    }
    std::vector<int64_t> by_quadrant(size_t{1} << n.cell.d, -1);
    for (uint32_t j = n.first_child; j < n.first_child + n.child_count; ++j)
      by_quadrant[quadrant_of(n.cell, tree_.node(j).cell)] = j;
    for (uint32_t qd = 0; qd < by_quadrant.size(); ++qd) {
      CanonicalCell sub = child_cell(n.cell, qd);
      int64_t c = by_quadrant[qd];
      if (c < 0) {
        out.push_back({sub, false, {}, lab});
        continue;
      }
      const auto& cn = tree_.node(static_cast<uint32_t>(c));
      if (!(cn.cell == sub)) out.push_back({sub, true, cn.cell, lab});
      st.push_back({static_cast<uint32_t>(c), lab});
    }
  }
  return out;
}

void Avd::write(Writer& w) const {
  tree_.write(w);
  w.u64(sketches_.size());
  for (const auto& s : sketches_) write_ids(w, s);
}

Avd Avd::read(Reader& r) {
  Avd a;
  a.tree_ = CompressedQuadtree::read(r);
  uint64_t n = r.count(8);
  for (uint64_t i = 0; i < n; ++i) a.sketches_.push_back(read_ids(r));
  for (const auto& l : a.tree_.labels())
    if (l.id < 0 || static_cast<uint64_t>(l.id) >= n) throw std::runtime_error("artifact: bad sketch index");
  return a;
}

}  // namespace genvor
