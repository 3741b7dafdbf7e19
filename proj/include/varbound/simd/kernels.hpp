#pragma once

// Data-parallel inner loops used by the estimators.
//
// Every kernel has a scalar reference implementation; vector variants
// (AVX2 on x86-64, NEON on aarch64) are selected once at runtime from the
// CPU feature set and can be overridden with VARBOUND_SIMD=scalar|avx2|neon.
//
// Block layout: a block of `count` points in `dim` dimensions is stored
// coordinate-major, coordinate c of point i at soa[c * stride + i].

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace varbound::simd {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  Backend backend;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // out[i] = sum_c (q[c] - p_i[c])^2
  void (*sq_l2_block)(const double* q, const double* soa, std::size_t stride,
                      std::size_t count, std::size_t dim, double* out);
  // out[i] = max_c |q[c] - p_i[c]|
  void (*linf_block)(const double* q, const double* soa, std::size_t stride,
                     std::size_t count, std::size_t dim, double* out);
};

const KernelTable& active();
const KernelTable& table(Backend backend);

bool supported(Backend backend);
std::vector<Backend> supported_backends();

// Pins the active backend (tests, benchmarking). Throws if unsupported.
void set_backend(Backend backend);
std::string_view name(Backend backend);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void sq_l2_block(const double* q, const double* soa, std::size_t stride,
                 std::size_t count, std::size_t dim, double* out);
void linf_block(const double* q, const double* soa, std::size_t stride,
                std::size_t count, std::size_t dim, double* out);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void sq_l2_block(const double* q, const double* soa, std::size_t stride,
                 std::size_t count, std::size_t dim, double* out);
void linf_block(const double* q, const double* soa, std::size_t stride,
                std::size_t count, std::size_t dim, double* out);
}  // namespace avx2

namespace neon {
double dot(const double* a, const double* b, std::size_t n);
void sq_l2_block(const double* q, const double* soa, std::size_t stride,
                 std::size_t count, std::size_t dim, double* out);
void linf_block(const double* q, const double* soa, std::size_t stride,
                std::size_t count, std::size_t dim, double* out);
}  // namespace neon

}  // namespace varbound::simd
