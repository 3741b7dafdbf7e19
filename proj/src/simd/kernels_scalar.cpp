#include "varbound/simd/kernels.hpp"

#include <cmath>

namespace varbound::simd::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void sq_l2_block(const double* q, const double* soa, std::size_t stride,
                 std::size_t count, std::size_t dim, double* out) {
  for (std::size_t i = 0; i < count; ++i) out[i] = 0.0;
  for (std::size_t c = 0; c < dim; ++c) {
    const double* col = soa + c * stride;
    const double qc = q[c];
    for (std::size_t i = 0; i < count; ++i) {
      const double d = qc - col[i];
      out[i] = out[i] + d * d;
    }
  }
}

void linf_block(const double* q, const double* soa, std::size_t stride,
                std::size_t count, std::size_t dim, double* out) {
  for (std::size_t i = 0; i < count; ++i) out[i] = 0.0;
  for (std::size_t c = 0; c < dim; ++c) {
    const double* col = soa + c * stride;
    const double qc = q[c];
    for (std::size_t i = 0; i < count; ++i) {
      const double d = std::fabs(qc - col[i]);
      out[i] = d > out[i] ? d : out[i];
    }
  }
}

}  // namespace varbound::simd::scalar
