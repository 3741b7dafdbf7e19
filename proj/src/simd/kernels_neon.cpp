// aarch64 variants. Multiply and add are issued separately (no vfmaq) so the
// block kernels round like the scalar reference.

#include <arm_neon.h>

#include "varbound/simd/kernels.hpp"

namespace varbound::simd::neon {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  float64x2_t acc2 = vdupq_n_f64(0.0);
  float64x2_t acc3 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = vaddq_f64(acc0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    acc1 = vaddq_f64(acc1, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
    acc2 = vaddq_f64(acc2, vmulq_f64(vld1q_f64(a + i + 4), vld1q_f64(b + i + 4)));
    acc3 = vaddq_f64(acc3, vmulq_f64(vld1q_f64(a + i + 6), vld1q_f64(b + i + 6)));
  }
  for (; i + 2 <= n; i += 2) {
    acc0 = vaddq_f64(acc0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  const float64x2_t acc = vaddq_f64(vaddq_f64(acc0, acc1), vaddq_f64(acc2, acc3));
  double sum = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void sq_l2_block(const double* q, const double* soa, std::size_t stride,
                 std::size_t count, std::size_t dim, double* out) {
  std::size_t i = 0;
  for (; i + 2 <= count; i += 2) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t c = 0; c < dim; ++c) {
      const float64x2_t d = vsubq_f64(vdupq_n_f64(q[c]), vld1q_f64(soa + c * stride + i));
      acc = vaddq_f64(acc, vmulq_f64(d, d));
    }
    vst1q_f64(out + i, acc);
  }
  if (i < count) scalar::sq_l2_block(q, soa + i, stride, count - i, dim, out + i);
}

void linf_block(const double* q, const double* soa, std::size_t stride,
                std::size_t count, std::size_t dim, double* out) {
  std::size_t i = 0;
  for (; i + 2 <= count; i += 2) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t c = 0; c < dim; ++c) {
      const float64x2_t d = vabsq_f64(vsubq_f64(vdupq_n_f64(q[c]), vld1q_f64(soa + c * stride + i)));
      acc = vbslq_f64(vcgtq_f64(d, acc), d, acc);
    }
    vst1q_f64(out + i, acc);
  }
  if (i < count) scalar::linf_block(q, soa + i, stride, count - i, dim, out + i);
}

}  // namespace varbound::simd::neon
