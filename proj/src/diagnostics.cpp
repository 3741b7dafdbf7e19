#include "varbound/diagnostics.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "varbound/errors.hpp"

namespace varbound {
namespace {

double chi2_sf(double stat, std::size_t dof) {
  if (!(stat > 0.0)) return 1.0;
  const boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

Vector channel_means(const SampleSet& s) {
  const auto n = static_cast<Eigen::Index>(s.dim());
  Vector mean = Vector::Zero(n);
  const auto& d = s.data();
  for (std::size_t i = 0; i < d.size(); ++i) mean[static_cast<Eigen::Index>(i % s.dim())] += d[i];
  return mean / static_cast<double>(s.paths() * s.length());
}

void require_nonconstant(const SampleSet& s) {
  if (s.paths() == 0 || s.length() == 0) throw std::invalid_argument("empty innovation set");
  for (std::size_t c = 0; c < s.dim(); ++c) {
    const double first = s.at(0, 0, c);
    bool varies = false;
    for (std::size_t p = 0; p < s.paths() && !varies; ++p) {
      for (std::size_t k = 0; k < s.length(); ++k) {
        if (s.at(p, k, c) != first) {
          varies = true;
          break;
        }
      }
    }
    if (!varies) throw DegenerateSeriesError("channel " + std::to_string(c) + " is constant");
  }
}

// sum_p sum_t (e_t - mu)(e_{t-h} - mu)^T / (paths * length)
Matrix pooled_autocov(const SampleSet& s, const Vector& mean, std::size_t h) {
  const auto n = static_cast<Eigen::Index>(s.dim());
  Matrix acc = Matrix::Zero(n, n);
  Vector a(n), b(n);
  for (std::size_t p = 0; p < s.paths(); ++p) {
    for (std::size_t t = h; t < s.length(); ++t) {
      for (Eigen::Index c = 0; c < n; ++c) {
        a[c] = s.at(p, t, static_cast<std::size_t>(c)) - mean[c];
        b[c] = s.at(p, t - h, static_cast<std::size_t>(c)) - mean[c];
      }
      acc.noalias() += a * b.transpose();
    }
  }
  return acc / static_cast<double>(s.paths() * s.length());
}

DiagnosticVerdict mi_verdict(DiagnosticTest test, const SampleSet& innovations, const SampleSet& past,
                             std::size_t first_lag, const MiTestOptions& opts) {
  if (opts.depth == 0) throw std::invalid_argument("embedding depth must be >= 1");
  if (innovations.paths() != past.paths() || innovations.length() != past.length()) {
    throw std::invalid_argument("innovations and past are not aligned");
  }
  require_nonconstant(innovations);
  const std::size_t span = first_lag + opts.depth - 1;
  if (innovations.length() <= span) throw std::invalid_argument("series too short for the embedding");
  std::vector<long> lags;
  for (std::size_t i = 0; i < opts.depth; ++i) lags.push_back(-static_cast<long>(first_lag + i));
  const PointCloud x = lagged_cloud(innovations, {0}, span, innovations.length(), opts.max_points);
  const PointCloud y = lagged_cloud(past, lags, span, past.length(), opts.max_points);
  const InfoEstimate mi = ksg_mutual_info(x, y, opts.knn);

  DiagnosticVerdict v;
  v.test = test;
  v.horizon = first_lag;
  v.statistic = mi.value;
  v.std_error = mi.std_error;
  v.threshold = kMiPassBits + 2.0 * mi.std_error;
  v.flags = mi.flags;
  v.pass = !mi.has_flag(flag::kSaturated) && mi.value < v.threshold;
  return v;
}

}  // namespace

std::string to_string(DiagnosticTest t) {
  switch (t) {
    case DiagnosticTest::LjungBox: return "ljung_box";
    case DiagnosticTest::JarqueBera: return "jarque_bera";
    case DiagnosticTest::InnovationIndependence: return "innovation_independence";
    case DiagnosticTest::ColoredOrder: return "colored_order_check";
  }
  return "unknown";
}

std::string DiagnosticVerdict::label() const {
  if (test == DiagnosticTest::ColoredOrder) return to_string(test) + "(" + std::to_string(horizon) + ")";
  return to_string(test);
}

DiagnosticVerdict ljung_box(const SampleSet& innovations, std::size_t n_lags, double alpha,
                            std::size_t first_lag) {
  if (n_lags == 0 || first_lag == 0) throw std::invalid_argument("ljung_box: lags must be positive");
  const std::size_t len = innovations.length();
  if (len <= 10 * n_lags || len <= first_lag + n_lags) {
    throw std::invalid_argument("ljung_box: series length must exceed 10 * n_lags");
  }
  require_nonconstant(innovations);
  const std::size_t n = innovations.dim();
  const Vector mean = channel_means(innovations);
  const Matrix c0 = pooled_autocov(innovations, mean, 0);
  const Eigen::LDLT<Matrix> c0_inv(c0);
  if (c0_inv.info() != Eigen::Success || !(c0.determinant() > 0.0)) {
    throw DegenerateSeriesError("innovation covariance is singular");
  }
  const double paths = static_cast<double>(innovations.paths());
  const double l = static_cast<double>(len);
  double q = 0.0;
  for (std::size_t h = first_lag; h < first_lag + n_lags; ++h) {
    const Matrix ch = pooled_autocov(innovations, mean, h);
    const Matrix a = c0_inv.solve(ch);
    const Matrix b = c0_inv.solve(ch.transpose());
    q += paths * l * l / (l - static_cast<double>(h)) * (a * b).trace();
  }
  // Lags below first_lag may be nonzero under the null (MA(first_lag - 1)),
  // which inflates the variance of every later autocovariance estimate.
  if (first_lag > 1) {
    const double nn = static_cast<double>(n * n);
    double kappa = nn;
    for (std::size_t j = 1; j < first_lag; ++j) {
      const double t = c0_inv.solve(pooled_autocov(innovations, mean, j)).trace();
      kappa += 2.0 * t * t;
    }
    q *= nn / kappa;
  }
  DiagnosticVerdict v;
  v.test = DiagnosticTest::LjungBox;
  v.horizon = first_lag;
  v.statistic = q;
  v.dof = n * n * n_lags;
  v.p_value = chi2_sf(q, v.dof);
  v.alpha = alpha;
  v.pass = *v.p_value > alpha;
  return v;
}

DiagnosticVerdict jarque_bera(const SampleSet& innovations, double alpha, std::size_t ma_order) {
  const std::size_t total = innovations.paths() * innovations.length();
  if (total < 1000) throw std::invalid_argument("jarque_bera: need at least 1000 samples");
  require_nonconstant(innovations);
  const std::size_t n = innovations.dim();
  const auto ni = static_cast<Eigen::Index>(n);
  const Vector mean = channel_means(innovations);
  const Matrix c0 = pooled_autocov(innovations, mean, 0);
  const Eigen::LLT<Matrix> llt(c0);
  if (llt.info() != Eigen::Success) throw DegenerateSeriesError("innovation covariance is singular");
  const Matrix lower = llt.matrixL();

  Vector m3 = Vector::Zero(ni), m4 = Vector::Zero(ni);
  Vector e(ni);
  for (std::size_t p = 0; p < innovations.paths(); ++p) {
    for (std::size_t k = 0; k < innovations.length(); ++k) {
      for (Eigen::Index c = 0; c < ni; ++c) e[c] = innovations.at(p, k, static_cast<std::size_t>(c)) - mean[c];
      const Vector z = lower.triangularView<Eigen::Lower>().solve(e);
      m3 += z.array().cube().matrix();
      m4 += z.array().square().square().matrix();
    }
  }
  const double nt = static_cast<double>(total);
  m3 /= nt;
  m4 /= nt;
  // Serial correlation inflates the variance of both moments.
  Vector s3 = Vector::Ones(ni), s4 = Vector::Ones(ni);
  for (std::size_t j = 1; j <= ma_order; ++j) {
    const Matrix cj = pooled_autocov(innovations, mean, j);
    const Matrix tmp = lower.triangularView<Eigen::Lower>().solve(cj);
    const Matrix rho = lower.triangularView<Eigen::Lower>().solve(tmp.transpose());
    for (Eigen::Index c = 0; c < ni; ++c) {
      const double r = rho(c, c);
      s3[c] += 2.0 * r * r * r;
      s4[c] += 2.0 * r * r * r * r;
    }
  }
  double jb = 0.0;
  for (Eigen::Index c = 0; c < ni; ++c) {
    const double ex = m4[c] - 3.0;
    jb += nt / 6.0 * (m3[c] * m3[c] / std::max(s3[c], 1e-12) + 0.25 * ex * ex / s4[c]);
  }
  DiagnosticVerdict v;
  v.test = DiagnosticTest::JarqueBera;
  v.statistic = jb;
  v.dof = 2 * n;
  v.p_value = chi2_sf(jb, v.dof);
  v.alpha = alpha;
  v.pass = *v.p_value > alpha;
  return v;
}

DiagnosticVerdict innovation_independence(const SampleSet& innovations, const SampleSet& past,
                                          const MiTestOptions& opts) {
  return mi_verdict(DiagnosticTest::InnovationIndependence, innovations, past, 1, opts);
}

DiagnosticVerdict colored_order_check(const SampleSet& innovations, std::size_t m, const MiTestOptions& opts) {
  if (m == 0) throw HorizonError("horizon must be >= 1");
  if (m == 1) {
    DiagnosticVerdict v = innovation_independence(innovations, innovations, opts);
    v.test = DiagnosticTest::ColoredOrder;
    return v;
  }
  return mi_verdict(DiagnosticTest::ColoredOrder, innovations, innovations, m, opts);
}

WhiteningVerdict gaussian_whitening_check(const PredictorReport& report, const SampleSet& samples,
                                          double alpha, const MiTestOptions& opts) {
  if (samples.paths() != report.innovations.paths() || samples.length() != report.innovations.length()) {
    throw std::invalid_argument("report was not produced on these samples");
  }
  const SampleSet innov = report.innovations.tail(report.tail_fraction);
  const SampleSet past = samples.tail(report.tail_fraction);
  const std::size_t m = report.horizon;
  const std::size_t lags = std::min<std::size_t>(kDefaultLjungBoxLags, (innov.length() - 1) / 10);

  WhiteningVerdict out;
  out.parts.push_back(jarque_bera(innov, alpha, m - 1));
  out.parts.push_back(ljung_box(innov, lags, alpha, m));
  if (m == 1) {
    out.parts.push_back(innovation_independence(innov, past, opts));
  } else {
    out.parts.push_back(colored_order_check(innov, m, opts));
  }
  for (auto& part : out.parts) part.alpha = alpha;
  out.pass = true;
  for (const auto& part : out.parts) out.pass = out.pass && part.pass;
  return out;
}

}  // namespace varbound
