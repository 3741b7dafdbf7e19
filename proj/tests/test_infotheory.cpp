#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "varbound/catalog.hpp"
#include "varbound/errors.hpp"
#include "varbound/infotheory.hpp"
#include "varbound/knn_tree.hpp"
#include "varbound/procgen.hpp"

using namespace varbound;
using std::numbers::e;
using std::numbers::pi;

namespace {

const double kHalfLog2PiE = 0.5 * std::log2(2 * pi * e);

KnnOptions fast() {
  KnnOptions o;
  o.resamples = 0;
  return o;
}

PointCloud gaussian_cloud(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> nd;
  PointCloud c;
  c.dim = d;
  c.data.resize(n * d);
  for (auto& v : c.data) v = nd(g);
  return c;
}

// (x, y) with unit variances and correlation rho.
std::pair<PointCloud, PointCloud> correlated(std::size_t n, double rho, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> nd;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = nd(g);
    y[i] = rho * x[i] + std::sqrt(1 - rho * rho) * nd(g);
  }
  return {PointCloud::from_scalar(x), PointCloud::from_scalar(y)};
}

}  // namespace

TEST_SUITE("infotheory") {
  TEST_CASE("kd-tree agrees with brute force") {
    for (Metric metric : {Metric::Euclidean, Metric::Chebyshev}) {
      for (std::size_t d : {1u, 2u, 3u, 6u}) {
        const auto c = gaussian_cloud(700, d, 10 + d);
        KnnTree tree(c.data, d, metric, 8);
        auto dist = [&](std::size_t i, std::size_t j) {
          double acc = 0.0;
          for (std::size_t k = 0; k < d; ++k) {
            const double diff = c.data[i * d + k] - c.data[j * d + k];
            acc = metric == Metric::Euclidean ? acc + diff * diff : std::max(acc, std::fabs(diff));
          }
          return metric == Metric::Euclidean ? std::sqrt(acc) : acc;
        };
        for (std::size_t i = 0; i < 700; i += 37) {
          std::vector<double> all;
          for (std::size_t j = 0; j < 700; ++j)
            if (j != i) all.push_back(dist(i, j));
          std::sort(all.begin(), all.end());
          for (std::size_t k : {1u, 4u, 10u}) {
            CHECK(tree.kth_neighbor_distance(i, k) == doctest::Approx(all[k - 1]).epsilon(1e-12));
          }
          const double r = all[20] * 1.0000001;
          const auto brute = static_cast<std::size_t>(std::count_if(all.begin(), all.end(), [&](double v) { return v < r; }));
          CHECK(tree.count_within(i, r) == brute);
        }
      }
    }
  }

  TEST_CASE("Kozachenko-Leonenko closed-form checks") {
    const std::size_t n = 100000;
    std::mt19937_64 g(77);
    SUBCASE("standard normal") {
      CHECK(std::fabs(knn_entropy(gaussian_cloud(n, 1, 1), fast()).value - kHalfLog2PiE) < 0.05);
    }
    SUBCASE("uniform(0,1)") {
      std::uniform_real_distribution<double> u;
      std::vector<double> v(n);
      for (auto& x : v) x = u(g);
      CHECK(std::fabs(knn_entropy(PointCloud::from_scalar(v), fast()).value) < 0.05);
    }
    SUBCASE("laplace b=1") {
      std::exponential_distribution<double> ex;
      std::bernoulli_distribution coin;
      std::vector<double> v(n);
      for (auto& x : v) x = coin(g) ? ex(g) : -ex(g);
      CHECK(std::fabs(knn_entropy(PointCloud::from_scalar(v), fast()).value - std::log2(2 * e)) < 0.05);
    }
  }

  TEST_CASE("entropy transforms under shift and scale") {
    auto c = gaussian_cloud(5000, 2, 3);
    const double h = knn_entropy(c, fast()).value;
    auto shifted = c;
    for (auto& v : shifted.data) v += 3.0;
    auto scaled = c;
    for (auto& v : scaled.data) v *= 4.0;
    CHECK(knn_entropy(shifted, fast()).value == doctest::Approx(h).epsilon(1e-9));
    CHECK(knn_entropy(scaled, fast()).value == doctest::Approx(h + 2 * std::log2(4.0)).epsilon(1e-9));
  }

  TEST_CASE("entropy preconditions and jitter") {
    CHECK_THROWS_AS(knn_entropy(gaussian_cloud(40, 1, 1), fast()), SampleSizeError);
    CHECK_THROWS_AS(knn_entropy(gaussian_cloud(1000, 9, 1), fast()), DimensionError);
    auto c = gaussian_cloud(2000, 1, 4);
    for (std::size_t i = 0; i < 100; ++i) c.data[i] = 0.5;
    CHECK(knn_entropy(c, fast()).has_flag(flag::kJittered));
  }

  TEST_CASE("half-sample standard error is populated") {
    KnnOptions o;
    o.resamples = 10;
    const auto est = knn_entropy(gaussian_cloud(20000, 1, 5), o);
    CHECK(est.std_error > 0.0);
    CHECK(est.std_error < 0.05);
  }

  TEST_CASE("KSG mutual information") {
    SUBCASE("independent") {
      const auto [x, y] = correlated(20000, 0.0, 6);
      CHECK(ksg_mutual_info(x, y, fast()).value < 0.02);
    }
    SUBCASE("rho = 0.5 closed form, exactly symmetric") {
      const auto [x, y] = correlated(20000, 0.5, 7);
      const double truth = -0.5 * std::log2(1 - 0.25);
      const auto a = ksg_mutual_info(x, y, fast());
      CHECK(std::fabs(a.value - truth) < 0.02);
      CHECK(ksg_mutual_info(y, x, fast()).value == a.value);
    }
    SUBCASE("y = x saturates") {
      const auto [x, y] = correlated(5000, 0.0, 8);
      const auto est = ksg_mutual_info(x, x, fast());
      CHECK(est.has_flag(flag::kSaturated));
      CHECK(est.value == doctest::Approx(0.5 * std::log2(5000.0)));
    }
  }

  TEST_CASE("conditional entropy") {
    SUBCASE("independent: h(x|y) = h(x)") {
      const auto [x, y] = correlated(20000, 0.0, 9);
      CHECK(std::fabs(conditional_entropy(x, y, fast()).value - kHalfLog2PiE) < 0.07);
    }
    SUBCASE("rho = 0.8: Gaussian conditional variance") {
      const auto [x, y] = correlated(20000, 0.8, 10);
      CHECK(std::fabs(conditional_entropy(x, y, fast()).value - 0.5 * std::log2(2 * pi * e * 0.36)) < 0.07);
    }
    SUBCASE("y = x is saturated") {
      const auto [x, y] = correlated(5000, 0.0, 11);
      CHECK(conditional_entropy(x, x, fast()).has_flag(flag::kSaturated));
    }
  }

  TEST_CASE("closed forms") {
    CHECK(gaussian_entropy_bits(Matrix::Constant(1, 1, 4.0)) == doctest::Approx(0.5 * std::log2(2 * pi * e * 4)));
    CHECK(entropy_power(gaussian_entropy_bits(Matrix::Constant(1, 1, 4.0)), 1) == doctest::Approx(4.0));
    std::vector<double> flat(256, 1.0);
    CHECK(gaussian_entropy_rate(SpectrumGrid::from_scalar(flat)).value == doctest::Approx(kHalfLog2PiE));
    CHECK(gaussian_entropy_rate(theoretical_spectrum(catalog_model("ar1_0.5"), 4096)).value ==
          doctest::Approx(kHalfLog2PiE).epsilon(1e-7));
    SpectrumGrid eye;
    eye.dim = 2;
    eye.values.assign(64, CMatrix::Identity(2, 2));
    CHECK(gaussian_entropy_rate(eye).value == doctest::Approx(std::log2(2 * pi * e)));
    std::vector<double> zero(64, 0.0);
    CHECK_THROWS_AS(gaussian_entropy_rate(SpectrumGrid::from_scalar(zero)), SingularSpectrumError);
  }

  TEST_CASE("Gaussian m-step conditional MI") {
    const auto& m = catalog_model("ar1_0.9");
    CHECK(gaussian_mstep_mi(m, 1).value == 0.0);
    CHECK(gaussian_mstep_mi(m, 3).value == doctest::Approx(0.5 * std::log2(1 + 0.81 + 0.6561)).epsilon(1e-12));
    CHECK(gaussian_mstep_mi(catalog_model("white_gauss"), 4).value == doctest::Approx(0.0).scale(1.0));
    double prev = 0.0;
    for (std::size_t h = 1; h <= 6; ++h) {
      const double v = gaussian_mstep_mi(catalog_model("arma21"), h).value;
      CHECK(v >= prev - 1e-15);
      prev = v;
    }
  }

  TEST_CASE("lagged cloud layout") {
    SampleSet s(2, 10, 1);
    for (std::size_t p = 0; p < 2; ++p)
      for (std::size_t k = 0; k < 10; ++k) s.at(p, k) = 100.0 * p + k;
    const auto c = lagged_cloud(s, {0, -1, -2}, 2, 10, 1000);
    CHECK(c.dim == 3);
    CHECK(c.size() == 16);
    CHECK(c.data[0] == 2.0);
    CHECK(c.data[1] == 1.0);
    CHECK(c.data[2] == 0.0);
    CHECK(lagged_cloud(s, {0, -1}, 1, 10, 5).size() <= 5);
  }

  TEST_CASE("empirical entropy rate and negentropy") {
    KnnOptions o = fast();
    SUBCASE("iid gaussian at several depths") {
      const auto s = simulate(catalog_model("white_gauss"), 20000, 5, 31);
      for (std::size_t p : {0u, 1u, 2u}) {
        CAPTURE(p);
        CHECK(std::fabs(empirical_entropy_rate(s, p, o).value - kHalfLog2PiE) < 0.07);
      }
    }
    SUBCASE("gaussian AR(1)") {
      const auto s = simulate(catalog_model("ar1_0.5"), 20000, 5, 32);
      for (std::size_t p : {1u, 2u}) CHECK(std::fabs(empirical_entropy_rate(s, p, o).value - kHalfLog2PiE) < 0.07);
      const auto spec = theoretical_spectrum(catalog_model("ar1_0.5"), 4096);
      CHECK(negentropy_rate(spec, s, 4, o).value < 0.07);
    }
    SUBCASE("iid laplace and uniform") {
      const auto lap = simulate(catalog_model("iid_laplace"), 20000, 5, 33);
      CHECK(std::fabs(empirical_entropy_rate(lap, 1, o).value - (kHalfLog2PiE - 0.5 * std::log2(pi / e))) < 0.07);
      const auto spec = theoretical_spectrum(catalog_model("iid_laplace"), 1024);
      CHECK(std::fabs(negentropy_rate(spec, lap, 4, o).value - 0.5 * std::log2(pi / e)) < 0.07);
      const auto uni = simulate(catalog_model("iid_uniform"), 20000, 5, 34);
      CHECK(std::fabs(negentropy_rate(spec, uni, 4, o).value - 0.5 * std::log2(pi * e / 6)) < 0.07);
    }
    SUBCASE("adaptive depth stays within the dimension cap") {
      const auto s = simulate(catalog_model("var1"), 5000, 4, 35);
      const auto est = adaptive_entropy_rate(s, 16, o);
      CHECK((est.embedding_depth + 1) * 2 <= kMaxEntropyDim);
      CHECK(est.has_flag(flag::kDepthClamped));
    }
    SUBCASE("negentropy is clamped at zero") {
      InfoEstimate high;
      high.value = 10.0;
      high.quantity = Quantity::EntropyRate;
      std::vector<double> flat(64, 1.0);
      const auto j = negentropy_rate(SpectrumGrid::from_scalar(flat), high);
      CHECK(j.value == 0.0);
      CHECK(j.has_flag(flag::kClamped));
    }
  }
}
