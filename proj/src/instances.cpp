#include "genvor/instances.hpp"

#include <cmath>
#include <numbers>

namespace genvor {

std::vector<Point> star_polygon(const Point& c, int spikes, double outer, double inner) {
  std::vector<Point> v;
  for (int i = 0; i < 2 * spikes; ++i) {
    double t = std::numbers::pi * i / spikes;
    double r = i % 2 == 0 ? outer : inner;
    v.push_back(Point{c[0] + r * std::cos(t), c[1] + r * std::sin(t)});
  }
  return v;
}

namespace {

Point uniform_point(Rng& rng, int d, double lo, double hi) {
  Point p(d);
  for (int k = 0; k < d; ++k) p[k] = rng.uniform(lo, hi);
  return p;
}

std::vector<Point> rectangle(const Point& c, double hx, double hy, double angle) {
  double ca = std::cos(angle), sa = std::sin(angle);
  std::vector<Point> v;
  for (auto [x, y] : {std::pair{hx, hy}, {-hx, hy}, {-hx, -hy}, {hx, -hy}})
    v.push_back(Point{c[0] + ca * x - sa * y, c[1] + sa * x + ca * y});
  return v;
}

}  // namespace

Instance random_instance(FamilyKind k, int n, int d, double eps, uint64_t seed, bool unit_weights) {
  Rng rng(seed);
  Instance inst;
  inst.family = k;
  inst.dim = k == FamilyKind::Scaling2D ? 2 : d;
  inst.epsilon = eps;
  inst.seed = seed;
  for (int i = 0; i < n; ++i) {
    switch (k) {
      case FamilyKind::MultOffset: {
        MultOffsetSite s;
        s.p = uniform_point(rng, inst.dim, 0.25, 0.75);
        s.w = unit_weights ? 1.0 : rng.uniform(0.5, 2.0);
        s.a = unit_weights ? 0.0 : rng.uniform(0, 0.05);
        inst.weighted.push_back(s);
        break;
      }
      case FamilyKind::Scaling2D: {
        BodySpec b;
        b.center = uniform_point(rng, 2, 0.3, 0.7);
        double r = rng.uniform(0.01, 0.05), angle = rng.uniform(0, std::numbers::pi);
        switch (rng.below(3)) {
          case 0: b.polygon = ellipse_polygon(b.center, r, r * rng.uniform(0.5, 1.0), angle); break;
          case 1: b.polygon = rectangle(b.center, r, r * rng.uniform(0.5, 1.0), angle); break;
          default: b.polygon = star_polygon(b.center, 6, r, 0.95 * r); break;
        }
        inst.bodies.push_back(std::move(b));
        break;
      }
      case FamilyKind::NearestFurthest: {
        Point c = uniform_point(rng, inst.dim, 0.3, 0.7);
        int m = 3 + static_cast<int>(rng.below(10));
        std::vector<Point> set;
        for (int j = 0; j < m; ++j) {
          Point p(inst.dim);
          for (int t = 0; t < inst.dim; ++t) p[t] = c[t] + rng.uniform(-0.05, 0.05) / std::sqrt(inst.dim);
          set.push_back(p);
        }
        inst.sets.push_back(std::move(set));
        break;
      }
    }
  }
  return inst;
}

Point random_query(Rng& rng, int d, bool outside) {
  Point q(d);
  double lo = outside ? -0.5 : 0, hi = outside ? 1.5 : 1;
  for (int k = 0; k < d; ++k) q[k] = rng.uniform(lo, hi);
  return q;
}

}  // namespace genvor
