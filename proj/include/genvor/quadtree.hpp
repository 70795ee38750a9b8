#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "genvor/bytes.hpp"
#include "genvor/geom.hpp"

namespace genvor {

struct Label {
  int32_t id = -1;
  double y = 0;
  int32_t prio = 0;
  bool operator==(const Label& o) const = default;
};

// Duplicate and overlay tie rule: smaller (prio, y, id) wins.
bool label_before(const Label& a, const Label& b);

struct LabeledCell {
  CanonicalCell cell;
  Label label;
};

// Z-order over canonical cells: ancestors precede descendants, siblings by quadrant.
bool zorder_less(const CanonicalCell& a, const CanonicalCell& b);

class CompressedQuadtree {
 public:
  struct Node {
    CanonicalCell cell;
    int32_t label = -1;  // index into labels(), -1 when unlabeled
    uint32_t first_child = 0;
    uint32_t child_count = 0;
  };

  CompressedQuadtree() = default;
  explicit CompressedQuadtree(int d);

  static CompressedQuadtree build(int d, std::span<const LabeledCell> cells);
  // Tree over distinct cells in z-order; node label index = position of its cell (branch nodes unlabeled).
  static CompressedQuadtree skeleton(int d, std::span<const CanonicalCell> sorted_unique);
  // Later trees take priority wherever they hold a cell containing the query.
  static CompressedQuadtree overlay(std::span<const CompressedQuadtree* const> trees);

  int dim() const { return d_; }
  size_t node_count() const { return nodes_.size(); }
  size_t labeled_count() const { return labels_.size(); }
  const Node& node(uint32_t i) const { return nodes_[i]; }
  std::span<const Node> nodes() const { return nodes_; }
  const std::vector<Label>& labels() const { return labels_; }
  std::optional<Label> label_of(uint32_t node) const;

  std::optional<Label> locate(const Point& q) const;
  std::optional<Label> locate(const QPoint& q) const;
  // Deepest node containing q and the deepest labeled node on its path (-1 if none).
  std::pair<uint32_t, int32_t> locate_nodes(const QPoint& q) const;
  // Children of node i whose cell contains q; returns -1 when none.
  int64_t child_containing(uint32_t i, const QPoint& q) const;

  std::vector<LabeledCell> labeled_cells() const;
  void dump(std::ostream& os) const;
  bool check_invariants(std::string* why = nullptr) const;

  void write(Writer& w) const;
  static CompressedQuadtree read(Reader& r);

 private:
  int d_ = 0;
  std::vector<Node> nodes_;
  std::vector<Label> labels_;

  friend class QuadtreeBuilder;
};

}  // namespace genvor
