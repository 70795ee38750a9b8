#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "genvor/geom.hpp"

namespace genvor {

// Sites w_i*|q - p_i| + a_i in axis-major layout for the batched min scan.
struct SoaSites {
  int d = 0;
  std::vector<double> coord[kMaxDim];
  std::vector<double> w, a;

  size_t size() const { return w.size(); }
  void push(const Point& p, double weight, double offset);
};

struct ScanResult {
  int64_t index = -1;
  double value = 0;
};

enum class KernelIsa { Scalar, Avx2 };

KernelIsa best_isa();
const char* isa_name(KernelIsa isa);

// Argmin of w_i*|q - p_i| + a_i; ties go to the smaller index. Every ISA returns bit-identical results.
ScanResult scan_min(const SoaSites& s, const Point& q);
ScanResult scan_min_with(KernelIsa isa, const SoaSites& s, const Point& q);

}  // namespace genvor
