// Compiled with -mavx2 only (no -mfma): the block kernels then perform the
// same mul/add/max sequence per lane as the scalar reference and agree with
// it bit-for-bit. The dot product reassociates into 16 partial sums.

#include <immintrin.h>

#include <cmath>

#include "varbound/simd/kernels.hpp"

namespace varbound::simd::avx2 {

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  __m256d acc3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
    acc2 = _mm256_add_pd(acc2, _mm256_mul_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8)));
    acc3 = _mm256_add_pd(acc3, _mm256_mul_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12)));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  const __m256d acc = _mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void sq_l2_block(const double* q, const double* soa, std::size_t stride,
                 std::size_t count, std::size_t dim, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t c = 0; c < dim; ++c) {
      const __m256d d = _mm256_sub_pd(_mm256_set1_pd(q[c]), _mm256_loadu_pd(soa + c * stride + i));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    _mm256_storeu_pd(out + i, acc);
  }
  if (i < count) scalar::sq_l2_block(q, soa + i, stride, count - i, dim, out + i);
}

void linf_block(const double* q, const double* soa, std::size_t stride,
                std::size_t count, std::size_t dim, double* out) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t c = 0; c < dim; ++c) {
      const __m256d d = _mm256_sub_pd(_mm256_set1_pd(q[c]), _mm256_loadu_pd(soa + c * stride + i));
      // max(d, acc) with acc >= 0 matches the scalar `d > acc ? d : acc`
      acc = _mm256_max_pd(_mm256_andnot_pd(sign_mask, d), acc);
    }
    _mm256_storeu_pd(out + i, acc);
  }
  if (i < count) scalar::linf_block(q, soa + i, stride, count - i, dim, out + i);
}

}  // namespace varbound::simd::avx2
