#include "genvor/quadtree.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>

namespace genvor {

bool label_before(const Label& a, const Label& b) {
  if (a.prio != b.prio) return a.prio < b.prio;
  if (a.y != b.y) return a.y < b.y;
  return a.id < b.id;
}

bool zorder_less(const CanonicalCell& a, const CanonicalCell& b) {
  int k = std::min(a.level, b.level);
  CanonicalCell A = ancestor(a, k), B = ancestor(b, k);
  if (A == B) return a.level < b.level;
  CanonicalCell L = common_ancestor(A, B);
  return quadrant_of(L, A) < quadrant_of(L, B);
}

class QuadtreeBuilder {
 public:
  struct BNode {
    CanonicalCell cell;
    int32_t payload = -1;
    int32_t first = -1, last = -1, next = -1;
  };

  explicit QuadtreeBuilder(int d) {
    nodes_.push_back({root_cell(d)});
    stack_.push_back(0);
  }

  // Cells must arrive distinct and in z-order.
  void add(const CanonicalCell& c, int32_t payload) {
    if (c.level == 0) {
      nodes_[0].payload = payload;
      return;
    }
    while (!cell_contains(nodes_[stack_.back()].cell, c)) stack_.pop_back();
    int32_t t = stack_.back();
    int32_t last = nodes_[t].last;
    if (last >= 0) {
      CanonicalCell l = common_ancestor(nodes_[last].cell, c);
      if (l.level > nodes_[t].cell.level) {
        auto m = static_cast<int32_t>(nodes_.size());
        BNode moved = nodes_[last];
        moved.next = -1;
        nodes_.push_back(moved);
        nodes_[last] = BNode{l, -1, m, m, -1};
        stack_.push_back(last);
        t = last;
      }
    }
    auto x = static_cast<int32_t>(nodes_.size());
    nodes_.push_back(BNode{c, payload});
    if (nodes_[t].last >= 0) nodes_[nodes_[t].last].next = x;
    else nodes_[t].first = x;
    nodes_[t].last = x;
    stack_.push_back(x);
  }

  void freeze(CompressedQuadtree& out) {
    out.nodes_.clear();
    out.nodes_.reserve(nodes_.size());
    std::vector<int32_t> order{0};
    order.reserve(nodes_.size());
    out.nodes_.push_back({nodes_[0].cell, nodes_[0].payload});
    for (size_t i = 0; i < order.size(); ++i) {
      const BNode& b = nodes_[order[i]];
      out.nodes_[i].first_child = static_cast<uint32_t>(order.size());
      uint32_t cnt = 0;
      for (int32_t c = b.first; c >= 0; c = nodes_[c].next) {
        order.push_back(c);
        out.nodes_.push_back({nodes_[c].cell, nodes_[c].payload});
        ++cnt;
      }
      out.nodes_[i].child_count = cnt;
      if (cnt == 0) out.nodes_[i].first_child = 0;
    }
  }

 private:
  std::vector<BNode> nodes_;
  std::vector<int32_t> stack_;
};

CompressedQuadtree::CompressedQuadtree(int d) : d_(d) {
  nodes_.push_back({root_cell(d)});
}

CompressedQuadtree CompressedQuadtree::build(int d, std::span<const LabeledCell> cells) {
  std::vector<LabeledCell> v(cells.begin(), cells.end());
  for (const auto& c : v)
    if (c.cell.d != d) throw std::invalid_argument("quadtree build: dimension mismatch");
  std::sort(v.begin(), v.end(), [](const LabeledCell& a, const LabeledCell& b) {
    if (a.cell == b.cell) return label_before(a.label, b.label);
    return zorder_less(a.cell, b.cell);
  });
  CompressedQuadtree t;
  t.d_ = d;
  QuadtreeBuilder b(d);
  for (size_t i = 0; i < v.size(); ++i) {
    if (i > 0 && v[i].cell == v[i - 1].cell) continue;
    b.add(v[i].cell, static_cast<int32_t>(t.labels_.size()));
    t.labels_.push_back(v[i].label);
  }
  b.freeze(t);
  return t;
}

CompressedQuadtree CompressedQuadtree::skeleton(int d, std::span<const CanonicalCell> sorted_unique) {
  CompressedQuadtree t;
  t.d_ = d;
  QuadtreeBuilder b(d);
  for (size_t i = 0; i < sorted_unique.size(); ++i) b.add(sorted_unique[i], static_cast<int32_t>(i));
  b.freeze(t);
  return t;
}

std::optional<Label> CompressedQuadtree::label_of(uint32_t node) const {
  int32_t l = nodes_[node].label;
  if (l < 0 || static_cast<size_t>(l) >= labels_.size()) return std::nullopt;
  return labels_[l];
}

int64_t CompressedQuadtree::child_containing(uint32_t i, const QPoint& q) const {
  const Node& n = nodes_[i];
  for (uint32_t j = n.first_child; j < n.first_child + n.child_count; ++j)
    if (qpoint_in_cell(q, nodes_[j].cell)) return j;
  return -1;
}

std::pair<uint32_t, int32_t> CompressedQuadtree::locate_nodes(const QPoint& q) const {
  uint32_t u = 0;
  int32_t best = nodes_[0].label >= 0 ? 0 : -1;
  while (true) {
    int64_t c = child_containing(u, q);
    if (c < 0) break;
    u = static_cast<uint32_t>(c);
    if (nodes_[u].label >= 0) best = static_cast<int32_t>(u);
  }
  return {u, best};
}

std::optional<Label> CompressedQuadtree::locate(const QPoint& q) const {
  auto [u, best] = locate_nodes(q);
  if (best < 0) return std::nullopt;
  return label_of(best);
}

std::optional<Label> CompressedQuadtree::locate(const Point& q) const {
  if (q.d != d_) throw std::invalid_argument("locate: dimension mismatch");
  if (!in_unit_cube(q)) return std::nullopt;
  return locate(quantize(q));
}

CompressedQuadtree CompressedQuadtree::overlay(std::span<const CompressedQuadtree* const> trees) {
  if (trees.empty()) throw std::invalid_argument("overlay: no trees");
  int d = trees[0]->dim();
  struct Entry {
    CanonicalCell cell;
    int src;
    Label label;
  };
  std::vector<Entry> entries;
  for (size_t t = 0; t < trees.size(); ++t) {
    if (trees[t]->dim() != d) throw std::invalid_argument("overlay: dimension mismatch");
    for (const auto& lc : trees[t]->labeled_cells()) entries.push_back({lc.cell, static_cast<int>(t), lc.label});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.cell == b.cell) return a.src < b.src;
    return zorder_less(a.cell, b.cell);
  });
  std::vector<CanonicalCell> cells;
  std::vector<size_t> group_start;
  for (size_t i = 0; i < entries.size(); ++i) {
    if (i == 0 || !(entries[i].cell == entries[i - 1].cell)) {
      cells.push_back(entries[i].cell);
      group_start.push_back(i);
    }
  }
  group_start.push_back(entries.size());
  CompressedQuadtree sk = skeleton(d, cells);

  std::vector<LabeledCell> out;
  std::map<int, Label> active;
  struct Frame {
    uint32_t node;
    std::optional<Label> inherited;
    size_t undo_mark;
    bool entered;
  };
  std::vector<std::pair<int, std::optional<Label>>> undo;
  std::vector<Frame> st{{0, std::nullopt, 0, false}};
  while (!st.empty()) {
    Frame& f = st.back();
    if (f.entered) {
      while (undo.size() > f.undo_mark) {
        auto [src, prev] = undo.back();
        undo.pop_back();
        if (prev) active[src] = *prev;
        else active.erase(src);
      }
      st.pop_back();
      continue;
    }
    f.entered = true;
    f.undo_mark = undo.size();
    const Node& n = sk.nodes_[f.node];
    if (n.label >= 0) {
      for (size_t e = group_start[n.label]; e < group_start[n.label + 1]; ++e) {
        auto it = active.find(entries[e].src);
        undo.emplace_back(entries[e].src, it == active.end() ? std::nullopt : std::optional<Label>(it->second));
        active[entries[e].src] = entries[e].label;
      }
    }
    std::optional<Label> here = active.empty() ? std::nullopt : std::optional<Label>(active.rbegin()->second);
    if (here && (!f.inherited || !(*here == *f.inherited))) out.push_back({n.cell, *here});
    std::optional<Label> pass = here ? here : f.inherited;
    uint32_t first = n.first_child, cnt = n.child_count;
    for (uint32_t j = 0; j < cnt; ++j) st.push_back({first + cnt - 1 - j, pass, 0, false});
  }
  return build(d, out);
}

std::vector<LabeledCell> CompressedQuadtree::labeled_cells() const {
  std::vector<LabeledCell> out;
  for (const Node& n : nodes_)
    if (n.label >= 0 && static_cast<size_t>(n.label) < labels_.size()) out.push_back({n.cell, labels_[n.label]});
  return out;
}

void CompressedQuadtree::dump(std::ostream& os) const {
  std::vector<uint32_t> st{0};
  char buf[64];
  while (!st.empty()) {
    uint32_t u = st.back();
    st.pop_back();
    const Node& n = nodes_[u];
    os << static_cast<int>(n.cell.level) << " (";
    for (int i = 0; i < n.cell.d; ++i) os << (i ? "," : "") << n.cell.idx[i];
    os << ")";
    if (auto l = label_of(u)) {
      std::snprintf(buf, sizeof buf, "%.17g", l->y);
      os << " " << l->id << " " << buf << " " << l->prio;
    }
    os << "\n";
    for (uint32_t j = n.child_count; j > 0; --j) st.push_back(n.first_child + j - 1);
  }
}

bool CompressedQuadtree::check_invariants(std::string* why) const {
  auto bad = [&](const std::string& s) {
    if (why) *why = s;
    return false;
  };
  if (nodes_.empty() || nodes_[0].cell.level != 0) return bad("missing root");
  for (uint32_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.label >= 0 && static_cast<size_t>(n.label) >= labels_.size()) return bad("label index out of range");
    if (i != 0 && n.label < 0 && n.child_count < 2) return bad("unlabeled node with fewer than two children");
    uint32_t seen = 0;
    for (uint32_t j = n.first_child; j < n.first_child + n.child_count; ++j) {
      if (j >= nodes_.size() || j <= i) return bad("child index out of range");
      const CanonicalCell& c = nodes_[j].cell;
      if (c.level <= n.cell.level || !cell_contains(n.cell, c)) return bad("child not strictly inside parent");
      uint32_t q = quadrant_of(n.cell, c);
      if (seen & (1u << q)) return bad("two children in one quadrant");
      seen |= 1u << q;
    }
  }
  return true;
}

void CompressedQuadtree::write(Writer& w) const {
  w.u32(static_cast<uint32_t>(d_));
  w.u64(nodes_.size());
  for (const Node& n : nodes_) {
    w.u8(n.cell.level);
    for (int i = 0; i < d_; ++i) w.u64(n.cell.idx[i]);
    w.i32(n.label);
    w.u32(n.first_child);
    w.u32(n.child_count);
  }
  w.u64(labels_.size());
  for (const Label& l : labels_) {
    w.i32(l.id);
    w.f64(l.y);
    w.i32(l.prio);
  }
}

CompressedQuadtree CompressedQuadtree::read(Reader& r) {
  CompressedQuadtree t;
  t.d_ = static_cast<int>(r.u32());
  if (t.d_ < 1 || t.d_ > kMaxDim) throw std::runtime_error("artifact: bad tree dimension");
  uint64_t n = r.count(13 + 8 * t.d_);
  if (n == 0) throw std::runtime_error("artifact: empty tree");
  t.nodes_.resize(n);
  for (Node& nd : t.nodes_) {
    nd.cell.d = static_cast<uint8_t>(t.d_);
    nd.cell.level = r.u8();
    if (nd.cell.level > kMaxLevel) throw std::runtime_error("artifact: bad cell level");
    for (int i = 0; i < t.d_; ++i) nd.cell.idx[i] = r.u64();
    nd.label = r.i32();
    nd.first_child = r.u32();
    nd.child_count = r.u32();
  }
  uint64_t m = r.count(16);
  t.labels_.resize(m);
  for (Label& l : t.labels_) {
    l.id = r.i32();
    l.y = r.f64();
    l.prio = r.i32();
  }
  for (uint32_t i = 0; i < n; ++i) {
    const Node& nd = t.nodes_[i];
    if (nd.child_count > 0 && (nd.first_child <= i || uint64_t{nd.first_child} + nd.child_count > n))
      throw std::runtime_error("artifact: bad child range");
  }
  return t;
}

}  // namespace genvor
