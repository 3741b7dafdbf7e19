#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "varbound/catalog.hpp"
#include "varbound/errors.hpp"
#include "varbound/procgen.hpp"
#include "varbound/spectral.hpp"

using namespace varbound;
using std::numbers::pi;

namespace {

// Midpoint quadrature of (1/2pi) int log2 S, on a grid unrelated to the library's.
template <class F>
double log_integral_oracle(F&& spectrum, std::size_t n = 1000000) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double w = -pi + 2.0 * pi * (j + 0.5) / n;
    acc += std::log2(spectrum(w));
  }
  return acc / n;
}

double arma_spectrum(double a, double b, double var, double w) {
  const std::complex<double> z = std::polar(1.0, -w);
  return var * std::norm(1.0 + b * z) / std::norm(1.0 - a * z);
}

// Trailing coefficients below the trim threshold are dropped.
double coef(const MinimumPhaseFactor& f, std::size_t k) { return k < f.coeffs.size() ? f.coeffs[k] : 0.0; }

}  // namespace

TEST_SUITE("spectral") {
  TEST_CASE("flat spectrum log integral") {
    std::vector<double> s(512, 4.0);
    CHECK(log_spectrum_integral(SpectrumGrid::from_scalar(s)).bits == doctest::Approx(2.0));
  }

  TEST_CASE("Szego identity for minimum-phase ARMA spectra") {
    for (const char* name : {"ar1_0.5", "ma1_0.5", "arma11"}) {
      CAPTURE(name);
      const auto& m = catalog_model(name);
      const double a = m.p() ? m.ar[0](0, 0) : 0.0;
      const double b = m.q() ? m.ma[0](0, 0) : 0.0;
      const double var = m.innovation.cov(0, 0);
      const double oracle = log_integral_oracle([&](double w) { return arma_spectrum(a, b, var, w); });
      CHECK(oracle == doctest::Approx(std::log2(var)).epsilon(1e-9).scale(1.0));
      const double got = log_spectrum_integral(theoretical_spectrum(m, 4096)).bits;
      CHECK(std::fabs(got - std::log2(var)) < 1e-6);
    }
  }

  TEST_CASE("log-det integral") {
    SUBCASE("identity") {
      SpectrumGrid g;
      g.dim = 2;
      g.values.assign(64, CMatrix::Identity(2, 2));
      CHECK(std::fabs(logdet_spectrum_integral(g).bits) < 1e-15);
    }
    SUBCASE("diagonal spectrum factorizes") {
      const auto s1 = theoretical_spectrum(catalog_model("ar1_0.9"), 1024);
      const auto s2 = theoretical_spectrum(catalog_model("ma2"), 1024);
      SpectrumGrid g;
      g.dim = 2;
      for (std::size_t j = 0; j < 1024; ++j) {
        CMatrix v = CMatrix::Zero(2, 2);
        v(0, 0) = s1.scalar(j);
        v(1, 1) = s2.scalar(j);
        g.values.push_back(v);
      }
      CHECK(logdet_spectrum_integral(g).bits ==
            doctest::Approx(log_spectrum_integral(s1).bits + log_spectrum_integral(s2).bits));
    }
    SUBCASE("VAR(1) multivariate Szego") {
      const double got = logdet_spectrum_integral(theoretical_spectrum(catalog_model("var1"), 4096)).bits;
      CHECK(std::fabs(got - std::log2(0.91)) < 1e-4);
    }
  }

  TEST_CASE("minimum-phase factorization") {
    SUBCASE("flat") {
      std::vector<double> s(1024, 4.0);
      const auto f = spectral_factorize(SpectrumGrid::from_scalar(s));
      CHECK(f.gain == doctest::Approx(2.0));
      for (std::size_t k = 1; k < 10; ++k) CHECK(std::fabs(coef(f, k)) < 1e-10);
    }
    SUBCASE("AR(1) gives the geometric series") {
      const auto f = spectral_factorize(theoretical_spectrum(catalog_model("ar1_0.5"), 4096));
      for (std::size_t k = 0; k < 20; ++k) CHECK(std::fabs(coef(f, k) - std::pow(0.5, k)) < 1e-6);
    }
    SUBCASE("non-minimum-phase MA(1) root is flipped inside") {
      std::vector<double> s(4096);
      for (std::size_t j = 0; j < s.size(); ++j) {
        const double w = -pi + 2.0 * pi * j / s.size();
        s[j] = std::norm(1.0 + 2.0 * std::polar(1.0, -w));
      }
      // root-flip oracle: 1 + 2 z^-1 has its zero at -2; flipping to -1/2 and
      // rescaling the gain by |2| gives 2 (1 + 0.5 z^-1)
      const auto f = spectral_factorize(SpectrumGrid::from_scalar(s));
      CHECK(f.coeffs[0] == doctest::Approx(2.0).epsilon(1e-6));
      CHECK(coef(f, 1) == doctest::Approx(1.0).epsilon(1e-6));
      for (std::size_t k = 2; k < 12; ++k) CHECK(std::fabs(coef(f, k)) < 1e-6);
      const auto back = factor_spectrum(f, 4096);
      for (std::size_t j = 0; j < 4096; j += 97) CHECK(back.scalar(j) == doctest::Approx(s[j]).epsilon(1e-6));
    }
    SUBCASE("zero spectrum is singular") {
      std::vector<double> s(256, 0.0);
      CHECK_THROWS_AS(spectral_factorize(SpectrumGrid::from_scalar(s)), SingularSpectrumError);
    }
  }

  TEST_CASE("sample autocovariance") {
    SUBCASE("zero samples") {
      SampleSet s(2, 100, 1);
      const auto r = estimate_autocov(s, 5);
      for (const auto& v : r.values) CHECK(v(0, 0) == 0.0);
    }
    SUBCASE("iid gaussian") {
      const auto r = estimate_autocov(simulate(catalog_model("white_gauss"), 1000000, 1, 8), 2);
      CHECK(r.values[0](0, 0) == doctest::Approx(1.0).epsilon(0.01));
      CHECK(std::fabs(r.values[1](0, 0)) < 0.01);
    }
    SUBCASE("AR(1) within 3 SE of the theoretical sequence") {
      const auto& m = catalog_model("ar1_0.5");
      const auto s = simulate(m, 10000, 40, 12);
      const auto r = estimate_autocov(s, 4);
      const auto t = theoretical_autocov(m, 4);
      // SE from the spread of per-path estimates
      for (std::size_t k = 0; k <= 4; ++k) {
        double sum = 0.0, sum2 = 0.0;
        for (std::size_t p = 0; p < s.paths(); ++p) {
          double acc = 0.0;
          for (std::size_t i = 0; i + k < s.length(); ++i) acc += s.at(p, i) * s.at(p, i + k);
          acc /= static_cast<double>(s.length());
          sum += acc;
          sum2 += acc * acc;
        }
        const double n = static_cast<double>(s.paths());
        const double se = std::sqrt((sum2 / n - (sum / n) * (sum / n)) / (n - 1));
        CHECK(std::fabs(r.values[k](0, 0) - t.values[k](0, 0)) < 3 * se);
      }
      CHECK_THROWS_AS(estimate_autocov(s, 2500), LagError);
    }
  }

  TEST_CASE("Welch spectrum") {
    SUBCASE("white level and normalization") {
      const auto s = simulate(catalog_model("white_gauss"), 100000, 2, 21);
      const auto g = welch_spectrum(s, 512, 0.5, 512);
      double mean = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) {
        CHECK(g.scalar(j) == doctest::Approx(1.0).epsilon(0.25));
        mean += g.scalar(j);
      }
      mean /= g.size();
      CHECK(mean == doctest::Approx(1.0).epsilon(0.05));
      CHECK(mean == doctest::Approx(estimate_autocov(s, 1).values[0](0, 0)).epsilon(0.01));
    }
    SUBCASE("AR(1) within 10% away from the band edges") {
      const auto& m = catalog_model("ar1_0.5");
      const auto s = simulate(m, 1000000, 1, 22);
      const auto g = welch_spectrum(s, 256, 0.5, 256);
      double worst = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) {
        const double w = g.frequency(j);
        if (std::fabs(w) > 0.9 * pi) continue;
        worst = std::max(worst, std::fabs(g.scalar(j) / arma_spectrum(0.5, 0.0, 1.0, w) - 1.0));
      }
      CHECK(worst < 0.10);
    }
  }
}
