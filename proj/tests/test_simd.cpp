#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "varbound/simd/kernels.hpp"

using namespace varbound::simd;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(g);
  return v;
}

}  // namespace

TEST_SUITE("simd") {
  TEST_CASE("scalar backend is always available") {
    CHECK(supported(Backend::Scalar));
    CHECK_FALSE(supported_backends().empty());
  }

  TEST_CASE("dot agrees with the scalar reference on ragged lengths") {
    for (Backend b : supported_backends()) {
      CAPTURE(name(b));
      for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 17u, 64u, 1001u}) {
        const auto x = random_vec(n, 11 + n);
        const auto y = random_vec(n, 97 + n);
        long double ref = 0.0L;
        double abs_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          ref += static_cast<long double>(x[i]) * y[i];
          abs_sum += std::fabs(x[i] * y[i]);
        }
        const double got = table(b).dot(x.data(), y.data(), n);
        CHECK(std::fabs(got - static_cast<double>(ref)) <= 4.0 * n * 1.2e-16 * abs_sum + 1e-300);
        CHECK(std::fabs(got - table(Backend::Scalar).dot(x.data(), y.data(), n)) <= 4.0 * n * 1.2e-16 * abs_sum + 1e-300);
      }
    }
  }

  TEST_CASE("block distance kernels are bit-identical across backends") {
    for (std::size_t dim : {1u, 2u, 3u, 5u, 8u}) {
      for (std::size_t count : {1u, 3u, 4u, 6u, 31u, 32u, 33u}) {
        const std::size_t stride = count + 3;
        const auto soa = random_vec(dim * stride, dim * 100 + count);
        const auto q = random_vec(dim, 7 * dim + count);
        std::vector<double> ref_l2(count), ref_inf(count);
        for (std::size_t i = 0; i < count; ++i) {
          double s = 0.0, m = 0.0;
          for (std::size_t c = 0; c < dim; ++c) {
            const double d = q[c] - soa[c * stride + i];
            s = s + d * d;
            m = std::max(m, std::fabs(d));
          }
          ref_l2[i] = s;
          ref_inf[i] = m;
        }
        for (Backend b : supported_backends()) {
          CAPTURE(name(b));
          std::vector<double> l2(count, -1.0), inf(count, -1.0);
          table(b).sq_l2_block(q.data(), soa.data(), stride, count, dim, l2.data());
          table(b).linf_block(q.data(), soa.data(), stride, count, dim, inf.data());
          CHECK(l2 == ref_l2);
          CHECK(inf == ref_inf);
        }
      }
    }
  }

  TEST_CASE("set_backend pins the active table") {
    const Backend before = active().backend;
    for (Backend b : supported_backends()) {
      set_backend(b);
      CHECK(active().backend == b);
    }
    set_backend(before);
    for (Backend b : {Backend::Avx2, Backend::Neon}) {
      if (!supported(b)) CHECK_THROWS(set_backend(b));
    }
  }
}
