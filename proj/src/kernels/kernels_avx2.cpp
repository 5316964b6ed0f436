// AVX2 variants of the arithmetic kernels. This translation unit is compiled
// with -mavx2 (and must never be entered on CPUs without AVX2; dispatch.cpp
// guards that). No FMA: each step is a separate multiply and add so results
// stay bit-identical to the scalar reference.

#include "visent/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

#include <algorithm>

namespace visent::kernels {
namespace avx2_impl {
namespace {

void gemm_avx2(const float* a, const float* b, float* c,
               std::int64_t m, std::int64_t k, std::int64_t n) {
  for (std::int64_t i = 0; i < m; ++i) {
    float* crow = c + i * n;
    std::fill(crow, crow + n, 0.0f);
    const float* arow = a + i * k;
    for (std::int64_t kk = 0; kk < k; ++kk) {
      const float as = arow[kk];
      const float* brow = b + kk * n;
      const __m256 av = _mm256_set1_ps(as);
      std::int64_t j = 0;
      for (; j + 16 <= n; j += 16) {
        __m256 c0 = _mm256_loadu_ps(crow + j);
        __m256 c1 = _mm256_loadu_ps(crow + j + 8);
        c0 = _mm256_add_ps(c0, _mm256_mul_ps(av, _mm256_loadu_ps(brow + j)));
        c1 = _mm256_add_ps(c1, _mm256_mul_ps(av, _mm256_loadu_ps(brow + j + 8)));
        _mm256_storeu_ps(crow + j, c0);
        _mm256_storeu_ps(crow + j + 8, c1);
      }
      for (; j + 8 <= n; j += 8) {
        __m256 cv = _mm256_loadu_ps(crow + j);
        cv = _mm256_add_ps(cv, _mm256_mul_ps(av, _mm256_loadu_ps(brow + j)));
        _mm256_storeu_ps(crow + j, cv);
      }
      for (; j < n; ++j) crow[j] += as * brow[j];
    }
  }
}

void relu_avx2(const float* x, float* y, std::size_t n) {
  // Mask form, not max: it reproduces the scalar branch bit-for-bit on
  // negative zero and NaN, where vmaxps would pass the input through.
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 v = _mm256_loadu_ps(x + i);
    const __m256 keep = _mm256_cmp_ps(v, zero, _CMP_GT_OQ);
    _mm256_storeu_ps(y + i, _mm256_and_ps(v, keep));
  }
  for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void axpy_avx2(float alpha, const float* x, float* y, std::size_t n) {
  const __m256 av = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 yv = _mm256_loadu_ps(y + i);
    yv = _mm256_add_ps(yv, _mm256_mul_ps(av, _mm256_loadu_ps(x + i)));
    _mm256_storeu_ps(y + i, yv);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

const KernelTable& table() {
  static const KernelTable t{"avx2", gemm_avx2, relu_avx2, axpy_avx2};
  return t;
}

}  // namespace avx2_impl
}  // namespace visent::kernels

#endif  // __AVX2__
