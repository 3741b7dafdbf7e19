#include "varbound/predict.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "varbound/errors.hpp"
#include "varbound/parallel.hpp"
#include "varbound/simd/kernels.hpp"

namespace varbound {
namespace {

double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

// Tail-averaged error covariance plus an SE for its determinant from the
// spread of per-path (or, for a single path, per-batch) determinants.
void summarize(PredictorReport& report, std::size_t dim) {
  const SampleSet& innov = report.innovations;
  const auto n = static_cast<Eigen::Index>(dim);
  const std::size_t len = innov.length();
  const auto keep = static_cast<std::size_t>(std::ceil(report.tail_fraction * static_cast<double>(len)));
  const std::size_t begin = len - std::min(keep, len);
  const std::size_t paths = innov.paths();

  // batch means: contiguous blocks inside each path, at least kMinBatches in
  // total as long as blocks stay kMinBatchLength long
  constexpr std::size_t kMinBatches = 40;
  constexpr std::size_t kMinBatchLength = 50;
  const std::size_t tail_len = len - begin;
  std::size_t per_path = (kMinBatches + paths - 1) / std::max<std::size_t>(paths, 1);
  per_path = std::max<std::size_t>(1, std::min(per_path, tail_len / kMinBatchLength));
  const std::size_t block = std::max<std::size_t>(1, tail_len / per_path);
  const std::size_t groups = paths * per_path;
  std::vector<Matrix> group_cov(groups, Matrix::Zero(n, n));
  std::vector<std::size_t> group_count(groups, 0);

  Matrix total = Matrix::Zero(n, n);
  for (std::size_t p = 0; p < paths; ++p) {
    for (std::size_t k = begin; k < len; ++k) {
      const Eigen::Map<const Vector> e(&innov.path(p)[k * dim], n);
      const Matrix outer = e * e.transpose();
      total += outer;
      const std::size_t g = p * per_path + std::min(per_path - 1, (k - begin) / block);
      group_cov[g] += outer;
      ++group_count[g];
    }
  }
  const double count = static_cast<double>(paths * (len - begin));
  report.error_cov = total / count;
  report.det_error_cov = report.error_cov.determinant();

  std::vector<double> dets;
  for (std::size_t g = 0; g < groups; ++g) {
    if (group_count[g] > 0) dets.push_back((group_cov[g] / static_cast<double>(group_count[g])).determinant());
  }
  double mean = 0.0;
  for (double d : dets) mean += d;
  mean /= static_cast<double>(dets.size());
  double ss = 0.0;
  for (double d : dets) ss += (d - mean) * (d - mean);
  const double b = static_cast<double>(dets.size());
  report.det_std_error = dets.size() > 1 ? std::sqrt(ss / (b - 1.0) / b) : 0.0;

  report.per_k_variance.assign(len, 0.0);
  for (std::size_t k = 0; k < len; ++k) {
    double acc = 0.0;
    for (std::size_t p = 0; p < paths; ++p) {
      for (std::size_t c = 0; c < dim; ++c) acc += innov.at(p, k, c) * innov.at(p, k, c);
    }
    report.per_k_variance[k] = acc / static_cast<double>(paths * dim);
  }
}

void check_horizon(std::size_t horizon, std::size_t order, std::size_t length) {
  if (horizon == 0) throw HorizonError("horizon must be >= 1");
  if (2 * (horizon + order) > length) {
    throw HorizonError("horizon + order must be <= length / 2");
  }
}

}  // namespace

LevinsonResult levinson(const AutocovSequence& autocov, std::size_t order) {
  if (autocov.dim != 1) throw DimensionError("levinson expects a scalar autocovariance; use multichannel_levinson");
  if (order > autocov.max_lag()) throw LagError("levinson order exceeds available lags");
  const auto r = [&](std::size_t k) { return autocov.values[k](0, 0); };

  LevinsonResult out;
  const double r0 = r(0);
  if (!(r0 > 0.0)) throw DegenerateProcessError("zero process variance");
  out.variances.push_back(r0);
  std::vector<double> a;
  for (std::size_t j = 1; j <= order; ++j) {
    double acc = r(j);
    for (std::size_t i = 1; i < j; ++i) acc -= a[i - 1] * r(j - i);
    const double k = acc / out.variances.back();
    if (std::fabs(k) > 1.0) throw MatrixError("autocovariance Toeplitz matrix is not positive semidefinite");
    std::vector<double> next(j);
    for (std::size_t i = 1; i < j; ++i) next[i - 1] = a[i - 1] - k * a[j - i - 1];
    next[j - 1] = k;
    a = std::move(next);
    const double v = out.variances.back() * (1.0 - k * k);
    if (v < kDegenerateVarianceFloor * r0) {
      throw DegenerateProcessError("prediction error variance vanished at order " + std::to_string(j));
    }
    out.reflection.push_back(k);
    out.variances.push_back(v);
  }
  out.coeffs = std::move(a);
  return out;
}

MultichannelLevinsonResult multichannel_levinson(const AutocovSequence& autocov, std::size_t order) {
  if (order > autocov.max_lag()) throw LagError("multichannel_levinson order exceeds available lags");
  const auto n = static_cast<Eigen::Index>(autocov.dim);
  const Matrix gamma0 = autocov.gamma(0);
  const double scale = gamma0.trace() / static_cast<double>(n);
  if (!(scale > 0.0)) throw DegenerateProcessError("zero process variance");

  std::vector<Matrix> fwd;  // Phi_{p,1..p}
  std::vector<Matrix> bwd;  // Phi~_{p,1..p}
  Matrix v = gamma0;
  Matrix u = gamma0;
  MultichannelLevinsonResult out;
  out.det_sequence.push_back(v.determinant());
  if (min_eigenvalue(v) < kDegenerateVarianceFloor * scale) {
    throw DegenerateProcessError("singular lag-0 covariance");
  }

  for (std::size_t p = 0; p < order; ++p) {
    const auto lag = static_cast<long>(p + 1);
    Matrix delta = autocov.gamma(lag);
    Matrix delta_b = autocov.gamma(-lag);
    for (std::size_t j = 1; j <= p; ++j) {
      delta -= fwd[j - 1] * autocov.gamma(lag - static_cast<long>(j));
      delta_b -= bwd[j - 1] * autocov.gamma(-lag + static_cast<long>(j));
    }
    const Matrix phi = delta * u.inverse();
    const Matrix phi_b = delta_b * v.inverse();
    std::vector<Matrix> next_f(p + 1);
    std::vector<Matrix> next_b(p + 1);
    for (std::size_t k = 1; k <= p; ++k) {
      next_f[k - 1] = fwd[k - 1] - phi * bwd[p - k];
      next_b[k - 1] = bwd[k - 1] - phi_b * fwd[p - k];
    }
    next_f[p] = phi;
    next_b[p] = phi_b;
    v = v - phi * delta_b;
    u = u - phi_b * delta;
    v = 0.5 * (v + v.transpose());
    u = 0.5 * (u + u.transpose());
    fwd = std::move(next_f);
    bwd = std::move(next_b);
    if (min_eigenvalue(v) < kDegenerateVarianceFloor * scale) {
      throw DegenerateProcessError("innovation covariance became singular at order " + std::to_string(p + 1));
    }
    out.det_sequence.push_back(v.determinant());
  }
  out.coeffs = std::move(fwd);
  out.innovation_cov = v;
  return out;
}

std::string to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::Levinson:
      return "levinson";
    case PredictorKind::MultichannelLevinson:
      return "multichannel_levinson";
    case PredictorKind::ModelMstep:
      return "model_mstep";
    case PredictorKind::Truncated:
      return "truncated";
    case PredictorKind::Zero:
      return "zero";
  }
  return "unknown";
}

std::string Predictor::label() const {
  switch (kind) {
    case PredictorKind::Zero:
      return "zero";
    case PredictorKind::ModelMstep:
      return "model_mstep(m=" + std::to_string(horizon) + ")";
    default:
      return to_string(kind) + "(" + std::to_string(order) + ")";
  }
}

Predictor fit_levinson(const AutocovSequence& autocov, std::size_t order) {
  Predictor pred;
  pred.dim = autocov.dim;
  pred.order = order;
  pred.horizon = 1;
  if (autocov.dim == 1) {
    pred.kind = PredictorKind::Levinson;
    const LevinsonResult fit = levinson(autocov, order);
    for (double a : fit.coeffs) pred.coeffs.push_back(Matrix::Constant(1, 1, a));
  } else {
    pred.kind = PredictorKind::MultichannelLevinson;
    pred.coeffs = multichannel_levinson(autocov, order).coeffs;
  }
  return pred;
}

Predictor fit_truncated(const AutocovSequence& autocov, std::size_t order) {
  Predictor pred = fit_levinson(autocov, order);
  pred.kind = PredictorKind::Truncated;
  return pred;
}

Predictor zero_predictor(std::size_t dim, std::size_t horizon) {
  Predictor pred;
  pred.kind = PredictorKind::Zero;
  pred.dim = dim;
  pred.horizon = horizon;
  return pred;
}

Predictor model_predictor(const ProcessModel& model, std::size_t horizon) {
  Predictor pred;
  pred.kind = PredictorKind::ModelMstep;
  pred.dim = model.dim;
  pred.horizon = horizon;
  pred.order = model.p() + model.q();
  pred.model = model;
  return pred;
}

PredictorReport run_predictor(const Predictor& predictor, const SampleSet& samples,
                              double tail_fraction, unsigned workers) {
  if (predictor.kind == PredictorKind::ModelMstep) {
    return mstep_predict(*predictor.model, samples, predictor.horizon, tail_fraction, workers);
  }
  if (samples.dim() != predictor.dim) throw DimensionError("predictor and samples differ in dimension");
  const std::size_t len = samples.length();
  check_horizon(predictor.horizon, predictor.order, len);
  const std::size_t n = predictor.dim;
  const std::size_t m = predictor.horizon;
  const std::size_t order = predictor.coeffs.size();

  PredictorReport report;
  report.predictor = predictor.label();
  report.horizon = m;
  report.n_paths = samples.paths();
  report.tail_fraction = tail_fraction;
  report.innovations = SampleSet(samples.paths(), len, n, samples.seed(), samples.burn_in());

  // Scalar coefficients reversed so the prediction is one contiguous dot.
  std::vector<double> reversed(order);
  if (n == 1) {
    for (std::size_t i = 0; i < order; ++i) reversed[i] = predictor.coeffs[order - 1 - i](0, 0);
  }

  parallel_for(samples.paths(), workers, [&](std::size_t p) {
    const auto x = samples.path(p);
    auto e = report.innovations.path(p);
    for (std::size_t k = 0; k < len; ++k) {
      // xhat_k = sum_i C_i x_{k-m+1-i}; pre-sample values are zero
      if (n == 1) {
        double pred = 0.0;
        if (order > 0 && k + 1 >= m + order) {
          pred = simd::active().dot(reversed.data(), x.data() + (k + 1 - m - order), order);
        } else {
          for (std::size_t i = 1; i <= order; ++i) {
            if (k + 1 >= m + i) pred += reversed[order - i] * x[k + 1 - m - i];
          }
        }
        e[k] = x[k] - pred;
        continue;
      }
      for (std::size_t c = 0; c < n; ++c) e[k * n + c] = x[k * n + c];
      for (std::size_t i = 1; i <= order; ++i) {
        if (k + 1 < m + i) break;
        const std::size_t src = k + 1 - m - i;
        const Matrix& coef = predictor.coeffs[i - 1];
        for (std::size_t r = 0; r < n; ++r) {
          double acc = 0.0;
          for (std::size_t c = 0; c < n; ++c) acc += coef(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * x[src * n + c];
          e[k * n + r] -= acc;
        }
      }
    }
  });
  summarize(report, n);
  return report;
}

PredictorReport mstep_predict(const ProcessModel& model, const SampleSet& samples, std::size_t m,
                              double tail_fraction, unsigned workers) {
  model.validate();
  if (samples.dim() != model.dim) throw DimensionError("model and samples differ in dimension");
  const std::size_t len = samples.length();
  if (m == 0) throw HorizonError("horizon must be >= 1");
  if (2 * m >= len) throw HorizonError("m must be < length / 2");
  if (model.q() > 0) require_invertible(model);

  const std::size_t n = model.dim;
  const std::size_t p = model.p();
  const std::size_t q = model.q();
  PredictorReport report;
  report.predictor = model_predictor(model, m).label();
  report.horizon = m;
  report.n_paths = samples.paths();
  report.tail_fraction = tail_fraction;
  report.innovations = SampleSet(samples.paths(), len, n, samples.seed(), samples.burn_in());

  const auto ni = static_cast<Eigen::Index>(n);
  parallel_for(samples.paths(), workers, [&](std::size_t path) {
    const auto xs = samples.path(path);
    auto x = [&](long s) -> Eigen::Map<const Vector> {
      return Eigen::Map<const Vector>(xs.data() + static_cast<std::size_t>(s) * n, ni);
    };
    // Innovations recovered by inverting the model (zero pre-sample values).
    std::vector<Vector> shock(len, Vector::Zero(ni));
    for (std::size_t t = 0; t < len; ++t) {
      Vector v = x(static_cast<long>(t));
      for (std::size_t i = 1; i <= p && i <= t; ++i) v -= model.ar[i - 1] * x(static_cast<long>(t - i));
      for (std::size_t j = 1; j <= q && j <= t; ++j) v -= model.ma[j - 1] * shock[t - j];
      shock[t] = std::move(v);
    }
    std::vector<Vector> ahead(m + 1);
    auto e = report.innovations.path(path);
    for (std::size_t k = 0; k < len; ++k) {
      Vector pred = Vector::Zero(ni);
      if (k >= m) {
        const long origin = static_cast<long>(k - m);
        for (std::size_t h = 1; h <= m; ++h) {
          Vector f = Vector::Zero(ni);
          for (std::size_t i = 1; i <= p; ++i) {
            const long s = origin + static_cast<long>(h) - static_cast<long>(i);
            if (s < 0) continue;
            if (s <= origin) {
              f += model.ar[i - 1] * x(s);
            } else {
              f += model.ar[i - 1] * ahead[static_cast<std::size_t>(s - origin)];
            }
          }
          for (std::size_t j = h; j <= q; ++j) {
            const long s = origin + static_cast<long>(h) - static_cast<long>(j);
            if (s >= 0) f += model.ma[j - 1] * shock[static_cast<std::size_t>(s)];
          }
          ahead[h] = std::move(f);
        }
        pred = ahead[m];
      }
      const auto xk = x(static_cast<long>(k));
      for (std::size_t c = 0; c < n; ++c) e[k * n + c] = xk[static_cast<Eigen::Index>(c)] - pred[static_cast<Eigen::Index>(c)];
    }
  });
  summarize(report, n);
  return report;
}

Matrix mstep_error_covariance(const ProcessModel& model, std::size_t m) {
  if (m == 0) throw HorizonError("horizon must be >= 1");
  const auto psi = psi_weights(model, m);
  const auto n = static_cast<Eigen::Index>(model.dim);
  Matrix cov = Matrix::Zero(n, n);
  for (const auto& w : psi) cov += w * model.innovation.cov * w.transpose();
  return cov;
}

}  // namespace varbound
