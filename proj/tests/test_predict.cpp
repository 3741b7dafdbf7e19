#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "varbound/catalog.hpp"
#include "varbound/errors.hpp"
#include "varbound/predict.hpp"
#include "varbound/procgen.hpp"

using namespace varbound;

TEST_SUITE("predict") {
  TEST_CASE("Levinson on white noise") {
    const auto r = levinson(theoretical_autocov(catalog_model("white_gauss"), 5), 5);
    for (double a : r.coeffs) CHECK(std::fabs(a) < 1e-15);
    CHECK(r.variances.back() == doctest::Approx(1.0));
  }

  TEST_CASE("Levinson AR(1) closed form") {
    const auto r = levinson(theoretical_autocov(catalog_model("ar1_0.5"), 1), 1);
    CHECK(r.coeffs[0] == doctest::Approx(0.5));
    CHECK(r.variances[1] == doctest::Approx(1.0));
    CHECK(r.variances[0] == doctest::Approx(4.0 / 3.0));
  }

  TEST_CASE("Levinson AR(2) against a direct Yule-Walker solve") {
    const auto ac = theoretical_autocov(catalog_model("ar2"), 2);
    Eigen::Matrix2d t;
    t << ac.values[0](0, 0), ac.values[1](0, 0), ac.values[1](0, 0), ac.values[0](0, 0);
    const Eigen::Vector2d rhs(ac.values[1](0, 0), ac.values[2](0, 0));
    const Eigen::Vector2d sol = t.fullPivLu().solve(rhs);
    const auto r = levinson(ac, 2);
    CHECK(std::fabs(r.coeffs[0] - sol(0)) < 1e-10);
    CHECK(std::fabs(r.coeffs[1] - sol(1)) < 1e-10);
    CHECK(std::fabs(r.coeffs[0] - 0.5) < 1e-10);
    CHECK(std::fabs(r.coeffs[1] + 0.3) < 1e-10);
    for (std::size_t j = 1; j < r.variances.size(); ++j) CHECK(r.variances[j] <= r.variances[j - 1]);
  }

  TEST_CASE("perfectly predictable sequence is degenerate") {
    AutocovSequence ac;
    ac.values = {Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0)};
    CHECK_THROWS_AS(levinson(ac, 2), DegenerateProcessError);
  }

  TEST_CASE("multichannel Levinson") {
    SUBCASE("bivariate white") {
      const auto& m = catalog_model("white2");
      const auto r = multichannel_levinson(theoretical_autocov(m, 3), 3);
      for (const auto& a : r.coeffs) CHECK(a.norm() < 1e-12);
      CHECK((r.innovation_cov - m.innovation.cov).norm() < 1e-12);
    }
    SUBCASE("VAR(1) against the block Yule-Walker solve") {
      ProcessModel m = catalog_model("var1");
      m.innovation.cov = Matrix::Identity(2, 2);
      const auto ac = theoretical_autocov(m, 2);
      const auto r = multichannel_levinson(ac, 1);
      // xhat = A x_{k-1} with A Gamma(0) = Gamma(1), Gamma(1) = E[x_{k+1} x_k^T] = R(1)^T
      const Matrix a_oracle = ac.values[1].transpose() * ac.values[0].inverse();
      CHECK((r.coeffs[0] - a_oracle).norm() < 1e-8);
      CHECK((r.coeffs[0] - m.ar[0]).norm() < 1e-8);
      CHECK((r.innovation_cov - Matrix::Identity(2, 2)).norm() < 1e-8);
    }
    SUBCASE("order-10 det V equals det Sigma") {
      const auto& m = catalog_model("var1");
      const auto r = multichannel_levinson(theoretical_autocov(m, 10), 10);
      CHECK(std::fabs(r.det_sequence.back() - m.innovation.cov.determinant()) < 1e-6);
      for (std::size_t j = 1; j < r.det_sequence.size(); ++j) CHECK(r.det_sequence[j] <= r.det_sequence[j - 1] + 1e-15);
    }
  }

  TEST_CASE("zero predictor on white noise") {
    const auto s = simulate(catalog_model("white_gauss"), 5000, 10, 1);
    const SampleSet tail = s.tail(0.5);
    double ms = 0.0;
    for (double v : tail.data()) ms += v * v;
    ms /= static_cast<double>(tail.data().size());
    const auto rep = run_predictor(zero_predictor(1), s);
    CHECK(rep.det_error_cov == doctest::Approx(ms).epsilon(1e-12));
  }

  TEST_CASE("Monte-Carlo standard error matches the spread across replicates") {
    for (std::size_t paths : {1u, 4u, 64u}) {
      CAPTURE(paths);
      const auto& m = catalog_model("ar1_0.9");
      const std::size_t reps = 150;
      double z2 = 0.0;
      std::size_t covered = 0;
      for (std::size_t r = 0; r < reps; ++r) {
        const auto s = simulate(m, 8000 / paths * 2, paths, 500 + r);
        const auto rep = run_predictor(zero_predictor(1), s);
        const double z = (rep.det_error_cov - 1.0 / 0.19) / rep.det_std_error;
        z2 += z * z;
        covered += std::fabs(z) <= 3.0;
      }
      CHECK(std::sqrt(z2 / reps) < 1.35);
      CHECK(std::sqrt(z2 / reps) > 0.7);
      CHECK(static_cast<double>(covered) / reps >= 0.97);
    }
  }

  TEST_CASE("Levinson(1) on AR(1) achieves sigma^2") {
    const auto& m = catalog_model("ar1_0.5");
    const auto s = simulate(m, 10000, 200, 2);
    const auto rep = run_predictor(fit_levinson(theoretical_autocov(m, 1), 1), s);
    CHECK(rep.det_error_cov == doctest::Approx(1.0).epsilon(0.02));
    CHECK(rep.det_std_error > 0.0);
    CHECK(rep.det_std_error < 0.01);
  }

  TEST_CASE("truncated(1) on AR(2) pays the Levinson gap") {
    const auto& m = catalog_model("ar2");
    const auto ac = theoretical_autocov(m, 2);
    const double r0 = ac.values[0](0, 0), r1 = ac.values[1](0, 0);
    const double v1 = r0 * (1.0 - (r1 / r0) * (r1 / r0));
    const auto s = simulate(m, 10000, 50, 3);
    const auto one = run_predictor(fit_truncated(ac, 1), s);
    const auto two = run_predictor(fit_levinson(ac, 2), s);
    CHECK(one.det_error_cov == doctest::Approx(v1).epsilon(0.03));
    CHECK(two.det_error_cov == doctest::Approx(1.0).epsilon(0.03));
    CHECK(one.det_error_cov - two.det_error_cov == doctest::Approx(v1 - 1.0).epsilon(0.15));
    CHECK(one.det_error_cov > two.det_error_cov);
  }

  TEST_CASE("m-step model predictor") {
    SUBCASE("m = 1 matches Levinson(1) on AR(1)") {
      const auto& m = catalog_model("ar1_0.5");
      const auto s = simulate(m, 2000, 5, 4);
      const auto a = mstep_predict(m, s, 1);
      const auto b = run_predictor(fit_levinson(theoretical_autocov(m, 1), 1), s);
      for (std::size_t i = 0; i < a.innovations.data().size(); ++i) {
        CHECK(a.innovations.data()[i] == doctest::Approx(b.innovations.data()[i]).epsilon(1e-12).scale(1.0));
      }
    }
    SUBCASE("AR(1) a=0.9, m=3 error variance") {
      const auto& m = catalog_model("ar1_0.9");
      const auto s = simulate(m, 10000, 50, 5);
      const auto rep = mstep_predict(m, s, 3);
      CHECK(rep.det_error_cov == doctest::Approx(1.0 + 0.81 + 0.6561).epsilon(0.03));
      CHECK(mstep_error_covariance(m, 3)(0, 0) == doctest::Approx(2.4661).epsilon(1e-12));
    }
    SUBCASE("white noise: any m gives sigma^2") {
      const auto& m = catalog_model("white_gauss");
      const auto s = simulate(m, 5000, 10, 6);
      const auto a = mstep_predict(m, s, 4);
      const auto b = run_predictor(zero_predictor(1), s);
      CHECK(a.det_error_cov == doctest::Approx(b.det_error_cov).epsilon(1e-12));
    }
    SUBCASE("horizon too long") {
      const auto& m = catalog_model("ar1_0.5");
      CHECK_THROWS_AS(mstep_predict(m, simulate(m, 20, 1, 1), 10), HorizonError);
    }
  }

  TEST_CASE("predictions never read the future") {
    const auto& m = catalog_model("arma21");
    SampleSet s = simulate(m, 400, 2, 7);
    const std::size_t t = 200;
    for (std::size_t horizon : {1u, 3u}) {
      CAPTURE(horizon);
      const Predictor pred = horizon == 1 ? fit_levinson(theoretical_autocov(m, 6), 6) : model_predictor(m, horizon);
      const auto base = run_predictor(pred, s, 1.0);
      SampleSet mutated = s;
      mutated.at(1, t) += 5.0;
      const auto moved = run_predictor(pred, mutated, 1.0);
      for (std::size_t k = 0; k < t; ++k) CHECK(moved.innovations.at(1, k) == base.innovations.at(1, k));
      CHECK(moved.innovations.at(1, t) == doctest::Approx(base.innovations.at(1, t) + 5.0));
      for (std::size_t k = t + 1; k < t + horizon; ++k) CHECK(moved.innovations.at(1, k) == base.innovations.at(1, k));
      for (std::size_t k = 0; k < s.length(); ++k) CHECK(moved.innovations.at(0, k) == base.innovations.at(0, k));
    }
  }
}
