#include "genvor/deciders.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace genvor {

NearDecider near_build(const DistanceFamily& f, std::span<const int> ids, double alpha, double eps) {
  if (!(alpha > 0)) throw std::invalid_argument("near_build: alpha must be positive");
  if (!(eps > 0 && eps <= 1)) throw std::invalid_argument("near_build: eps must lie in (0,1]");
  if (ids.empty()) throw std::invalid_argument("near_build: no ids");
  NearDecider dec;
  dec.alpha = alpha;
  dec.eps = eps;
  dec.ids.assign(ids.begin(), ids.end());
  std::vector<LabeledCell> cells;
  for (int id : ids) {
    if (f.sublevel_nonempty_threshold(id) > alpha) continue;
    for (const auto& c : sublevel_cells(f, id, alpha, eps * f.growth(id, alpha)))
      cells.push_back({c, Label{id, alpha, 0}});
  }
  dec.tree = CompressedQuadtree::build(f.dim(), cells);
  return dec;
}

NearResult near_query(const DistanceFamily& f, const NearDecider& dec, const Point& q) {
  if (!in_unit_cube(q)) {
    MinResult m = scan_ids(f, dec.ids, q);
    if (m.value <= dec.alpha) return {true, m.id};
    return {};
  }
  auto l = dec.tree.locate(q);
  if (!l) return {};
  return {true, l->id};
}

int interval_rung_count(double alpha, double beta, double eps) {
  if (!(alpha > 0)) throw std::invalid_argument("interval_build: alpha must be positive");
  if (!(beta >= alpha)) throw std::invalid_argument("interval_build: beta must be >= alpha");
  if (!(eps > 0 && eps <= 1)) throw std::invalid_argument("interval_build: eps must lie in (0,1]");
  return static_cast<int>(std::ceil(std::log(4 * beta / alpha) / std::log1p(eps / 4)));
}

double interval_rung(double alpha, double eps, int i) { return 0.5 * alpha * std::pow(1 + eps / 4, i); }

double IntervalStructure::rung(int i) const { return interval_rung(alpha, eps, i); }

IntervalResult interval_decode(const Label& l) {
  IntervalResult r;
  r.kind = static_cast<IntervalKind>(l.prio);
  r.id = l.id;
  r.near_id = static_cast<int>(l.y);
  return r;
}

IntervalResult interval_answer(const DistanceFamily& f, const IntervalStructure& s, const Label& l, const Point& q) {
  IntervalResult r = interval_decode(l);
  if (r.kind == IntervalKind::Within && s.pool_cap > 0) {
    r.pool = r.id;
    r.id = scan_ids(f, s.pools.at(r.pool), q).id;
  }
  return r;
}

namespace {

struct ILabel {
  int32_t kind = 2, id = -1, near = -1;
  bool operator==(const ILabel&) const = default;
};

struct Key {
  int i, negk, id;
  auto operator<=>(const Key&) const = default;
};

class IntervalBuilder {
 public:
  IntervalBuilder(const DistanceFamily& f, const IntervalStructure& s, const NearDecider* refine)
      : f_(f), d_(f.dim()), eps_r_(s.eps / 4), L_(s.rungs), refine_(refine), pool_cap_(s.pool_cap), below_limit_(s.below_limit) {
    r_.resize(L_ + 1);
    for (int i = 0; i <= L_; ++i) r_[i] = s.rung(i);
    log_step_ = std::log1p(eps_r_);
    ithr_.assign(f.size(), L_ + 1);
    for (int id : s.ids) {
      double t = f.sublevel_nonempty_threshold(id);
      int i = t <= r_[0] ? 0 : std::max(0, static_cast<int>(std::floor(std::log(t / r_[0]) / log_step_)) - 1);
      while (i <= L_ && r_[i] < t) ++i;
      ithr_[id] = i;
    }
  }

  std::vector<LabeledCell> run(std::span<const int> ids, IntervalBuildStats& stats) {
    std::vector<int> cands;
    for (int id : ids)
      if (ithr_[id] <= L_) cands.push_back(id);
    CanonicalCell root = root_cell(d_);
    ILabel def = visit(root, cands);
    if (!(def == ILabel{})) emit(root, def);
    stats = stats_;
    return std::move(out_);
  }

  std::vector<std::vector<int>> take_pools() { return std::move(pools_); }

 private:
  int level(int id, int i) const { return grid_level_clamped(eps_r_ * f_.growth(id, r_[i]), d_); }
  Key key(int id, int i) const { return {i, -level(id, i), id}; }

  BoxStatus status(int id, int i, const CanonicalCell& q) const {
    if (i < ithr_[id]) return BoxStatus::None;
    return f_.box_status(id, r_[i], level(id, i), q);
  }

  // Rung index lower bound: every rung i with (1+eps/4)*r_i < v has an empty cover over the box.
  int rung_below(double v) const {
    if (!(v > r_[0])) return 0;
    double t = std::log(v / r_[0]) / log_step_;
    if (t > L_ + 2) return L_ + 1;
    return std::max(0, static_cast<int>(std::floor(t)) - 2);
  }

  int rung_at_least(double v) const {
    if (!(v > r_[0])) return 0;
    double t = std::log(v / r_[0]) / log_step_;
    if (t > L_ + 2) return L_ + 1;
    int i = std::max(0, static_cast<int>(std::floor(t)) - 1);
    while (i <= L_ && r_[i] < v) ++i;
    return i;
  }

  // First index in [a, b] where pred holds, assuming pred flips at most once; b + 1 if never.
  template <class P>
  static int gallop(int a, int b, P pred) {
    if (a > b) return b + 1;
    if (pred(a)) return a;
    int lo = a, step = 1, hi;
    while (true) {
      hi = lo + step;
      if (hi >= b) {
        if (lo == b || !pred(b)) return b + 1;
        hi = b;
        break;
      }
      if (pred(hi)) break;
      lo = hi;
      step *= 2;
    }
    while (hi - lo > 1) {
      int mid = lo + (hi - lo) / 2;
      (pred(mid) ? hi : lo) = mid;
    }
    return hi;
  }

  struct Near {
    bool constant;
    int id;
  };

  Near near_over(const CanonicalCell& q) const {
    const CompressedQuadtree& t = refine_->tree;
    uint32_t u = 0;
    int id = t.node(0).label >= 0 ? t.label_of(0)->id : -1;
    while (true) {
      const auto& n = t.node(u);
      int64_t next = -1;
      for (uint32_t j = n.first_child; j < n.first_child + n.child_count; ++j) {
        const CanonicalCell& c = t.node(j).cell;
        if (c.level <= q.level) {
          if (cell_contains(c, q)) {
            next = j;
            break;
          }
        } else if (cell_contains(q, c)) {
          return {false, -1};
        }
      }
      if (next < 0) return {true, id};
      u = static_cast<uint32_t>(next);
      if (auto l = t.label_of(u)) id = l->id;
    }
  }

  // In pooled mode every Within label names a candidate list, so single witnesses become singletons.
  ILabel pooled(ILabel l) {
    if (pool_cap_ > 0 && l.kind == 1) l.id = pool_of({l.id});
    return l;
  }

  int pool_of(std::vector<int> ids) {
    std::sort(ids.begin(), ids.end());
    auto [it, fresh] = pool_index_.emplace(ids, static_cast<int>(pools_.size()));
    if (fresh) pools_.push_back(std::move(ids));
    return it->second;
  }

  void emit(const CanonicalCell& c, const ILabel& l) {
    out_.push_back({c, Label{l.id, static_cast<double>(l.near), l.kind}});
  }

  ILabel visit(const CanonicalCell& q, const std::vector<int>& cands) {
    ++stats_.boxes;
    Box qb = cell_box(q);
    const int inf = L_ + 1;
    struct Cand {
      int id, first, all;
    };
    std::vector<Cand> info;
    info.reserve(cands.size());
    Key best{inf, 0, 0};
    bool have_best = false;
    for (int id : cands) {
      EvalBounds eb = f_.eval_bounds(id, qb);
      int lo = std::max(ithr_[id], rung_below(eb.lo / (1 + eps_r_)));
      int first = gallop(lo, L_, [&](int i) { return status(id, i, q) != BoxStatus::None; });
      if (first > L_) continue;
      int all = first;
      if (status(id, first, q) != BoxStatus::All) {
        int sure = std::max(first, rung_at_least(eb.hi));
        int cap = std::min(sure, L_);
        all = gallop(first + 1, cap, [&](int i) { return status(id, i, q) == BoxStatus::All; });
        if (all > cap) all = sure <= L_ ? sure : inf;
      }
      info.push_back({id, first, all});
      if (all <= L_) {
        Key k = key(id, all);
        if (!have_best || k < best) best = k, have_best = true;
      }
    }

    std::vector<int> next;
    bool below_possible = false;
    const Cand* owner = nullptr;
    for (const Cand& c : info) {
      if (have_best && !(key(c.id, c.first) <= best)) continue;
      next.push_back(c.id);
      below_possible = below_possible || c.first == 0;
      owner = &c;
    }
    if (below_limit_ > 0 && below_possible && next.size() == 1 && owner->all <= L_ &&
        (1 + eps_r_) * r_[owner->all] < below_limit_) {
      // The whole box lies in the owner's cover at a level under the limit.
      ILabel l{0, owner->id, -1};
      Near nr = refine_ ? near_over(q) : Near{true, -1};
      if (nr.constant) {
        l.near = nr.id;
        ++stats_.leaves;
        return l;
      }
    }
    if (pool_cap_ > 0 && have_best && !below_possible && next.size() <= static_cast<size_t>(pool_cap_)) {
      // Every first-rung witness over the box is in next, so their argmin is at least as good.
      ++stats_.leaves;
      return {1, pool_of(next), -1};
    }
    next.clear();
    ILabel labels[2];
    int nlabels = 0;
    bool many = false;
    auto add = [&](const ILabel& l) {
      for (int j = 0; j < nlabels; ++j)
        if (labels[j] == l) return;
      if (nlabels < 2) labels[nlabels++] = l;
      else many = true;
    };
    for (const Cand& c : info) {
      if (have_best && !(key(c.id, c.first) <= best)) continue;
      next.push_back(c.id);
      if (c.first == 0 && (!have_best || key(c.id, 0) <= best)) add({0, c.id, -1});
      int j = std::max(c.first, 1);
      int top = c.all <= L_ ? c.all : L_;
      if (j <= top && (!have_best || key(c.id, j) <= best)) add({1, c.id, -1});
    }
    if (!have_best) add(ILabel{});
    many = many || nlabels > 1;

    if (!many && nlabels == 1 && labels[0].kind == 0 && refine_) {
      Near nr = near_over(q);
      if (nr.constant) labels[0].near = nr.id;
      else many = true;
    }
    if (!many) {
      ++stats_.leaves;
      return pooled(labels[0]);
    }
    if (q.level >= kMaxLevel) {
      // Unreachable when statuses are exact at the finest level; keep a counter as a guard.
      ++stats_.forced;
      ++stats_.leaves;
      return pooled(labels[0]);
    }
    uint32_t nchild = 1u << d_;
    std::vector<ILabel> got(nchild);
    for (uint32_t c = 0; c < nchild; ++c) got[c] = visit(child_cell(q, c), next);
    ILabel major = got[0];
    int best_count = 0;
    for (uint32_t a = 0; a < nchild; ++a) {
      int cnt = 0;
      for (uint32_t b = 0; b < nchild; ++b) cnt += got[b] == got[a];
      if (cnt > best_count) best_count = cnt, major = got[a];
    }
    for (uint32_t c = 0; c < nchild; ++c)
      if (!(got[c] == major)) emit(child_cell(q, c), got[c]);
    return major;
  }

  const DistanceFamily& f_;
  int d_;
  double eps_r_;
  int L_;
  const NearDecider* refine_;
  double log_step_ = 0;
  std::vector<double> r_;
  std::vector<int> ithr_;
  int pool_cap_;
  double below_limit_;
  std::vector<LabeledCell> out_;
  std::map<std::vector<int>, int> pool_index_;
  std::vector<std::vector<int>> pools_;
  IntervalBuildStats stats_;
};

}  // namespace

IntervalStructure interval_build(const DistanceFamily& f, std::span<const int> ids, double alpha, double beta,
                                 double eps, const IntervalOptions& opt) {
  IntervalStructure s;
  s.rungs = interval_rung_count(alpha, beta, eps);
  if (ids.empty()) throw std::invalid_argument("interval_build: no ids");
  s.alpha = alpha;
  s.beta = beta;
  s.eps = eps;
  s.ids.assign(ids.begin(), ids.end());
  s.refined = opt.refine != nullptr;
  s.pool_cap = std::max(0, opt.pool_cap);
  s.below_limit = opt.below_limit > alpha ? opt.below_limit : 0;
  IntervalBuilder b(f, s, opt.refine);
  auto cells = b.run(ids, s.stats);
  s.pools = b.take_pools();
  s.tree = CompressedQuadtree::build(f.dim(), cells);
  return s;
}

IntervalResult interval_query(const DistanceFamily& f, const IntervalStructure& s, const Point& q) {
  if (!in_unit_cube(q)) {
    MinResult m = scan_ids(f, s.ids, q);
    IntervalResult r;
    r.id = m.id;
    if (m.value < s.alpha) r.kind = IntervalKind::Below, r.near_id = m.id;
    else if (m.value <= s.beta) r.kind = IntervalKind::Within;
    else r.kind = IntervalKind::Above, r.id = -1;
    return r;
  }
  auto l = s.tree.locate(q);
  if (!l) return {};
  return interval_answer(f, s, *l, q);
}

NearDecider interval_rung_decider(const DistanceFamily& f, const IntervalStructure& s, int i) {
  return near_build(f, s.ids, s.rung(i), s.eps / 4);
}

IntervalResult interval_sequential(const DistanceFamily& f, const IntervalStructure& s,
                                   std::span<const NearDecider> rungs, const Point& q, const NearDecider* refine) {
  for (size_t i = 0; i < rungs.size(); ++i) {
    NearResult nr = near_query(f, rungs[i], q);
    if (!nr.yes) continue;
    IntervalResult r;
    r.id = nr.id;
    if (i == 0) {
      r.kind = IntervalKind::Below;
      if (refine) {
        NearResult w = near_query(f, *refine, q);
        r.near_id = w.yes ? w.id : -1;
      }
    } else {
      r.kind = IntervalKind::Within;
    }
    return r;
  }
  (void)s;
  return {};
}

}  // namespace genvor
