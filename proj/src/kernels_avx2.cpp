// Compiled with -mavx2 -mfma; only reached through runtime dispatch.
#include <immintrin.h>

#include "cassini/kernels.hpp"

namespace cassini::kernels::avx2 {

namespace {

inline __m256d gather(const double* base, const std::int32_t* idx) {
  const __m128i vi = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx));
  return _mm256_i32gather_pd(base, vi, 8);
}

}  // namespace

double gather_sum(const GatherPlan& plan, const Tables& tabs) {
  const std::size_t n = plan.size();
  const double* c = plan.coeff.data();
  const std::int32_t* i0 = plan.idx[0].data();
  const std::int32_t* i1 = plan.idx[1].data();
  const std::int32_t* i2 = plan.idx[2].data();
  const std::int32_t* i3 = plan.idx[3].data();

  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d p = _mm256_loadu_pd(c + i);
    p = _mm256_mul_pd(p, gather(tabs.t[0], i0 + i));
    p = _mm256_mul_pd(p, gather(tabs.t[1], i1 + i));
    p = _mm256_mul_pd(p, gather(tabs.t[2], i2 + i));
    // Last factor fused into the accumulation.
    acc = _mm256_fmadd_pd(p, gather(tabs.t[3], i3 + i), acc);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double tail = 0.0;
  for (; i < n; ++i) {
    tail += c[i] * tabs.t[0][i0[i]] * tabs.t[1][i1[i]] * tabs.t[2][i2[i]] *
            tabs.t[3][i3[i]];
  }
  return ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3])) + tail;
}

}  // namespace cassini::kernels::avx2
