#pragma once

#include <cstdint>
#include <vector>

#include "genvor/io.hpp"
#include "genvor/rng.hpp"

namespace genvor {

// Random instances with all geometry inside [1/4, 3/4]^d.
// mult_offset: weights in [0.5, 2], offsets in [0, 0.05] (1 and 0 with unit_weights).
// scaling2d: ellipses, rotated rectangles and mild six-point stars with radii in [0.01, 0.05].
// nearest_furthest: 3 to 12 points within 0.05 of a random center.
Instance random_instance(FamilyKind k, int n, int d, double eps, uint64_t seed, bool unit_weights = false);

std::vector<Point> star_polygon(const Point& c, int spikes, double outer, double inner);

// Uniform in [0,1)^d, or in [-0.5, 1.5)^d when outside is set.
Point random_query(Rng& rng, int d, bool outside);

}  // namespace genvor
