#include "genvor/kernels.hpp"

#include <cmath>
#include <stdexcept>

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define GENVOR_HAVE_X86 1
#endif

namespace genvor {

void SoaSites::push(const Point& p, double weight, double offset) {
  if (d == 0) d = p.d;
  for (int k = 0; k < d; ++k) coord[k].push_back(p.x[k]);
  w.push_back(weight);
  a.push_back(offset);
}

namespace {

ScanResult scan_scalar(const SoaSites& s, const Point& q, size_t begin, ScanResult best) {
  size_t n = s.size();
  for (size_t i = begin; i < n; ++i) {
    double acc = 0;
    for (int k = 0; k < s.d; ++k) {
      double t = s.coord[k][i] - q.x[k];
      acc = acc + t * t;
    }
    double v = s.w[i] * std::sqrt(acc) + s.a[i];
    if (best.index < 0 || v < best.value) best = {static_cast<int64_t>(i), v};
  }
  return best;
}

#ifdef GENVOR_HAVE_X86
__attribute__((target("avx2"))) ScanResult scan_avx2(const SoaSites& s, const Point& q) {
  size_t n = s.size();
  size_t blocks = n / 4;
  if (blocks == 0) return scan_scalar(s, q, 0, {});
  __m256d best = _mm256_set1_pd(INFINITY);
  __m256d best_idx = _mm256_set1_pd(-1.0);
  __m256d lane = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
  __m256d four = _mm256_set1_pd(4.0);
  __m256d qv[kMaxDim];
  for (int k = 0; k < s.d; ++k) qv[k] = _mm256_set1_pd(q.x[k]);
  for (size_t b = 0; b < blocks; ++b) {
    size_t i = 4 * b;
    __m256d acc = _mm256_setzero_pd();
    for (int k = 0; k < s.d; ++k) {
      __m256d t = _mm256_sub_pd(_mm256_loadu_pd(&s.coord[k][i]), qv[k]);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(t, t));
    }
    __m256d v = _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(&s.w[i]), _mm256_sqrt_pd(acc)), _mm256_loadu_pd(&s.a[i]));
    __m256d lt = _mm256_cmp_pd(v, best, _CMP_LT_OQ);
    best = _mm256_blendv_pd(best, v, lt);
    best_idx = _mm256_blendv_pd(best_idx, lane, lt);
    lane = _mm256_add_pd(lane, four);
  }
  alignas(32) double bv[4], bi[4];
  _mm256_store_pd(bv, best);
  _mm256_store_pd(bi, best_idx);
  ScanResult r;
  for (int j = 0; j < 4; ++j) {
    if (bi[j] < 0) continue;
    auto idx = static_cast<int64_t>(bi[j]);
    if (r.index < 0 || bv[j] < r.value || (bv[j] == r.value && idx < r.index)) r = {idx, bv[j]};
  }
  return scan_scalar(s, q, 4 * blocks, r);
}
#endif

}  // namespace

KernelIsa best_isa() {
#ifdef GENVOR_HAVE_X86
  static const bool avx2 = __builtin_cpu_supports("avx2");
  if (avx2) return KernelIsa::Avx2;
#endif
  return KernelIsa::Scalar;
}

const char* isa_name(KernelIsa isa) { return isa == KernelIsa::Avx2 ? "avx2" : "scalar"; }

ScanResult scan_min_with(KernelIsa isa, const SoaSites& s, const Point& q) {
  if (q.d != s.d && s.size() > 0) throw std::invalid_argument("scan_min: dimension mismatch");
  switch (isa) {
    case KernelIsa::Avx2:
#ifdef GENVOR_HAVE_X86
      return scan_avx2(s, q);
#else
      throw std::invalid_argument("scan_min: avx2 not available");
#endif
    case KernelIsa::Scalar:
      break;
  }
  return scan_scalar(s, q, 0, {});
}

ScanResult scan_min(const SoaSites& s, const Point& q) { return scan_min_with(best_isa(), s, q); }

}  // namespace genvor
