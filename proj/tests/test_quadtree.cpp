#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "genvor/quadtree.hpp"
#include "genvor/rng.hpp"

using namespace genvor;

namespace {

CanonicalCell random_cell(Rng& rng, int d, int max_level) {
  int level = static_cast<int>(rng.below(max_level + 1));
  Point q(d);
  for (int k = 0; k < d; ++k) q[k] = rng.uniform();
  return cell_of(quantize(q), level);
}

// Deepest containing cell wins; equal cells resolve by label_before.
std::optional<Label> brute_locate(const std::vector<LabeledCell>& cells, const Point& q) {
  std::optional<LabeledCell> best;
  for (const auto& lc : cells) {
    if (!point_in_cell(q, lc.cell)) continue;
    if (!best || lc.cell.level > best->cell.level ||
        (lc.cell == best->cell && label_before(lc.label, best->label)))
      best = lc;
  }
  if (!best) return std::nullopt;
  return best->label;
}

}  // namespace

TEST(Quadtree, ZOrderPutsAncestorsFirst) {
  CanonicalCell r = root_cell(2), a = child_cell(r, 1), b = child_cell(r, 2);
  EXPECT_TRUE(zorder_less(r, a));
  EXPECT_TRUE(zorder_less(a, child_cell(a, 3)));
  EXPECT_TRUE(zorder_less(child_cell(a, 3), b));
  EXPECT_FALSE(zorder_less(a, a));
}

TEST(Quadtree, LocateMatchesBruteForce) {
  Rng rng(5);
  for (int d = 1; d <= 3; ++d) {
    std::vector<LabeledCell> cells;
    for (int i = 0; i < 300; ++i)
      cells.push_back({random_cell(rng, d, 12), Label{i, rng.uniform(), static_cast<int32_t>(rng.below(3))}});
    // Duplicates with competing labels.
    for (int i = 0; i < 20; ++i) cells.push_back({cells[i].cell, Label{1000 + i, -1, 0}});
    auto t = CompressedQuadtree::build(d, cells);
    std::string why;
    EXPECT_TRUE(t.check_invariants(&why)) << why;
    for (int s = 0; s < 3000; ++s) {
      Point q(d);
      for (int k = 0; k < d; ++k) q[k] = rng.uniform();
      EXPECT_EQ(t.locate(q), brute_locate(cells, q)) << "d=" << d;
    }
  }
}

TEST(Quadtree, CompressionKeepsSizeLinear) {
  // A deep chain of nested cells: unary paths collapse, so nodes stay O(cells).
  std::vector<LabeledCell> cells;
  CanonicalCell c = root_cell(2);
  for (int k = 0; k < 60; k += 6) {
    for (int j = 0; j < 6; ++j) c = child_cell(c, 2);
    cells.push_back({c, Label{k, 0, 0}});
  }
  auto t = CompressedQuadtree::build(2, cells);
  EXPECT_LE(t.node_count(), 2 * cells.size() + 1);
  EXPECT_EQ(t.labeled_count(), cells.size());
}

TEST(Quadtree, OverlayPrefersLaterTrees) {
  Rng rng(6);
  std::vector<LabeledCell> a, b;
  for (int i = 0; i < 100; ++i) a.push_back({random_cell(rng, 2, 8), Label{i, 0, 0}});
  for (int i = 0; i < 100; ++i) b.push_back({random_cell(rng, 2, 8), Label{500 + i, 0, 0}});
  auto ta = CompressedQuadtree::build(2, a), tb = CompressedQuadtree::build(2, b);
  const CompressedQuadtree* both[] = {&ta, &tb};
  auto o = CompressedQuadtree::overlay(both);
  EXPECT_TRUE(o.check_invariants());
  for (int s = 0; s < 3000; ++s) {
    Point q{rng.uniform(), rng.uniform()};
    auto lb = tb.locate(q);
    EXPECT_EQ(o.locate(q), lb ? lb : ta.locate(q));
  }
}

TEST(Quadtree, RoundTripAndDump) {
  Rng rng(7);
  std::vector<LabeledCell> cells;
  for (int i = 0; i < 50; ++i) cells.push_back({random_cell(rng, 2, 6), Label{i, 0.25 * i, i % 3}});
  auto t = CompressedQuadtree::build(2, cells);
  Writer w;
  t.write(w);
  Reader r(w.bytes());
  auto u = CompressedQuadtree::read(r);
  std::ostringstream a, b;
  t.dump(a);
  u.dump(b);
  const std::string text = a.str();
  EXPECT_EQ(text, b.str());
  // One line per node: "level (i,j)" and, when labeled, "id y prio".
  EXPECT_EQ(text.rfind("0 (0,0)", 0), 0u);
  EXPECT_EQ(static_cast<size_t>(std::count(text.begin(), text.end(), '\n')), t.node_count());
}

TEST(Quadtree, EmptyTreeLocatesNothing) {
  auto t = CompressedQuadtree::build(2, {});
  EXPECT_FALSE(t.locate(Point{0.5, 0.5}).has_value());
  EXPECT_TRUE(t.check_invariants());
}
