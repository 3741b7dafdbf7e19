#include "varbound/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "varbound/errors.hpp"
#include "varbound/spectral.hpp"

namespace varbound {
namespace {

constexpr double kLn2 = std::numbers::ln2;

double det_entropy_power(double h_bits, std::size_t n) {
  return std::exp2(2.0 * h_bits) / std::pow(kTwoPiE, static_cast<double>(n));
}

Bound entropy_bound(BoundKind kind, const InfoEstimate& h, std::size_t n) {
  if (n == 0) throw std::invalid_argument("bound dimension must be positive");
  Bound b;
  b.kind = kind;
  b.dim = n;
  b.flags = h.flags;
  b.inputs.emplace_back(to_string(h.quantity), h.value);
  if (h.has_flag(flag::kSaturated) || !std::isfinite(h.value)) {
    b.add_flag(flag::kDegenerate);
    return b;
  }
  b.value = det_entropy_power(h.value, n);
  b.std_error = b.value * 2.0 * kLn2 * h.std_error;
  return b;
}

Bound spectral_bound(BoundKind kind, const SpectrumGrid& spec, const LogIntegral& li) {
  Bound b;
  b.kind = kind;
  b.dim = spec.dim;
  b.inputs.emplace_back("log_integral", li.bits);
  if (li.floored) {
    b.add_flag(flag::kSingularSpectrum);
    b.add_flag(flag::kDegenerate);
    return b;
  }
  b.value = std::exp2(li.bits);
  return b;
}

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::string to_string(BoundKind k) {
  switch (k) {
    case BoundKind::Estimation: return "estimation";
    case BoundKind::Prediction1Step: return "prediction_1step";
    case BoundKind::PredictionMstep: return "prediction_mstep";
    case BoundKind::Ks: return "ks";
    case BoundKind::Wm: return "wm";
    case BoundKind::NonGaussian: return "nongaussian";
    case BoundKind::Recursive: return "recursive";
    case BoundKind::Learning: return "learning";
    case BoundKind::EntropyPowerCap: return "entropy_power_cap";
  }
  return "unknown";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Equality: return "equality";
    case Verdict::Strict: return "strict";
    case Verdict::Degenerate: return "degenerate";
  }
  return "unknown";
}

bool Bound::degenerate() const { return has_flag(flag::kDegenerate); }

bool Bound::has_flag(std::string_view f) const {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

void Bound::add_flag(std::string_view f) {
  if (!has_flag(f)) flags.emplace_back(f);
}

Bound estimation_bound(const InfoEstimate& h_cond, std::size_t n) {
  if (h_cond.quantity != Quantity::ConditionalEntropy && h_cond.quantity != Quantity::Entropy &&
      h_cond.quantity != Quantity::EntropyRate) {
    throw std::invalid_argument("estimation_bound needs an entropy input");
  }
  return entropy_bound(BoundKind::Estimation, h_cond, n);
}

Bound ks_bound(const SpectrumGrid& spec) {
  return spectral_bound(BoundKind::Ks, spec, log_spectrum_integral(spec));
}

Bound wm_bound(const SpectrumGrid& spec) {
  return spectral_bound(BoundKind::Wm, spec, logdet_spectrum_integral(spec));
}

Bound one_step_bound(const SpectrumGrid& spec) { return spec.dim == 1 ? ks_bound(spec) : wm_bound(spec); }

Bound mstep_bound(const Bound& one_step, std::size_t m, const InfoEstimate& mi_term) {
  if (m == 0) throw HorizonError("horizon must be >= 1");
  Bound b = one_step;
  b.kind = BoundKind::PredictionMstep;
  b.horizon = m;
  for (const auto& f : mi_term.flags) b.add_flag(f);
  double mi = mi_term.value;
  if (mi < 0.0) {
    mi = 0.0;
    b.add_flag(flag::kClamped);
  }
  b.inputs.emplace_back("mutual_info", mi);
  if (b.degenerate()) return b;
  const double factor = std::exp2(2.0 * mi);
  b.value = one_step.value * factor;
  const double rel_mi = 2.0 * kLn2 * mi_term.std_error;
  const double rel_base = one_step.value > 0.0 ? one_step.std_error / one_step.value : 0.0;
  b.std_error = b.value * std::hypot(rel_mi, rel_base);
  return b;
}

Bound mstep_bound(const ProcessModel& model, std::size_t m, std::size_t n_freq) {
  return mstep_bound(one_step_bound(theoretical_spectrum(model, n_freq)), m, gaussian_mstep_mi(model, m));
}

double mstep_bound_additive(const Bound& one_step, const InfoEstimate& mi_term) {
  return one_step.value + det_entropy_power(std::max(0.0, mi_term.value), one_step.dim);
}

Bound entropy_power_cap(const InfoEstimate& h_marginal, std::size_t n) {
  Bound b = entropy_bound(BoundKind::EntropyPowerCap, h_marginal, n);
  if (!b.degenerate()) b.inputs.emplace_back("entropy_power", entropy_power(h_marginal.value, n));
  return b;
}

Bound nongaussian_bound(const SpectrumGrid& spec, const InfoEstimate& j_rate) {
  if (j_rate.quantity != Quantity::NegentropyRate) {
    throw std::invalid_argument("nongaussian_bound needs a negentropy rate");
  }
  Bound b = one_step_bound(spec);
  b.kind = BoundKind::NonGaussian;
  for (const auto& f : j_rate.flags) b.add_flag(f);
  b.inputs.emplace_back("negentropy_rate", j_rate.value);
  if (b.degenerate()) return b;
  const double j = std::max(0.0, j_rate.value);
  b.value = b.value * std::exp2(-2.0 * j);
  b.std_error = b.value * 2.0 * kLn2 * j_rate.std_error;
  return b;
}

Bound recursive_bound(const InfoEstimate& noise_entropy_rate, std::size_t n) {
  return entropy_bound(BoundKind::Recursive, noise_entropy_rate, n);
}

Bound learning_bound(const InfoEstimate& h_cond) {
  return entropy_bound(BoundKind::Learning, h_cond, h_cond.dim);
}

LearningDemoResult run_learning_demo(const LearningDemo& demo) {
  if (demo.n_train == 0 || demo.draws < 2) throw std::invalid_argument("learning demo needs data and draws");
  if (!(demo.prior_var > 0.0) || !(demo.noise_var > 0.0) || demo.ridge_lambda < 0.0) {
    throw std::invalid_argument("learning demo variances must be positive");
  }
  LearningDemoResult r;
  std::mt19937_64 design(mix(demo.seed));
  std::normal_distribution<double> normal;
  r.x_train.resize(demo.n_train);
  for (auto& x : r.x_train) x = normal(design);
  r.x_test = normal(design);

  double sxx = 0.0;
  for (double x : r.x_train) sxx += x * x;
  const double post_var = 1.0 / (1.0 / demo.prior_var + sxx / demo.noise_var);
  r.predictive_var = r.x_test * r.x_test * post_var + demo.noise_var;

  InfoEstimate h;
  h.quantity = Quantity::ConditionalEntropy;
  h.estimator = Estimator::GaussianClosedForm;
  h.dim = 1;
  h.n_samples = demo.n_train;
  h.value = 0.5 * std::log2(kTwoPiE * r.predictive_var);
  r.bound = learning_bound(h);

  std::mt19937_64 engine(mix(demo.seed ^ 0xa0761d6478bd642fULL));
  const double sd_theta = std::sqrt(demo.prior_var);
  const double sd_noise = std::sqrt(demo.noise_var);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t d = 0; d < demo.draws; ++d) {
    const double theta = sd_theta * normal(engine);
    double sxy = 0.0;
    for (double x : r.x_train) sxy += x * (theta * x + sd_noise * normal(engine));
    const double theta_hat = sxy / (sxx + demo.ridge_lambda);
    const double y_test = theta * r.x_test + sd_noise * normal(engine);
    const double err = y_test - theta_hat * r.x_test;
    sum += err * err;
    sum_sq += err * err * err * err;
  }
  const double nd = static_cast<double>(demo.draws);
  r.achieved = sum / nd;
  r.achieved_std_error = std::sqrt(std::max(0.0, sum_sq / nd - r.achieved * r.achieved) / (nd - 1.0));
  return r;
}

BoundReport gap_report(const Bound& bound, double achieved, double achieved_std_error,
                       std::span<const DiagnosticVerdict> diagnostics, std::string predictor) {
  BoundReport r;
  r.bound = bound;
  r.predictor = std::move(predictor);
  r.achieved = achieved;
  r.achieved_std_error = achieved_std_error;
  r.diagnostics.assign(diagnostics.begin(), diagnostics.end());
  r.diagnostics_pass = std::all_of(diagnostics.begin(), diagnostics.end(),
                                   [](const DiagnosticVerdict& v) { return v.pass; });
  if (bound.degenerate() || !(bound.value > 0.0)) {
    r.verdict = Verdict::Degenerate;
    r.gap_ratio = 0.0;
    return r;
  }
  r.gap_ratio = achieved / bound.value;
  const double rel_a = achieved > 0.0 ? achieved_std_error / achieved : 0.0;
  const double rel_b = bound.std_error / bound.value;
  r.eps_mc = 3.0 * std::hypot(rel_a, rel_b);
  if (r.gap_ratio < 1.0 - r.eps_mc - kNumericalSlack) {
    throw BoundViolationError(to_string(bound.kind) + " bound " + std::to_string(bound.value) +
                              " exceeds achieved " + std::to_string(achieved) + " (gap " +
                              std::to_string(r.gap_ratio) + ", eps_mc " + std::to_string(r.eps_mc) + ")");
  }
  const double eps = std::max(r.eps_mc, kEqualityTolerance);
  r.verdict = (r.gap_ratio <= 1.0 + eps && r.diagnostics_pass) ? Verdict::Equality : Verdict::Strict;
  return r;
}

BoundReport gap_report(const Bound& bound, const PredictorReport& report,
                       std::span<const DiagnosticVerdict> diagnostics) {
  if (bound.dim != static_cast<std::size_t>(report.error_cov.rows())) {
    throw DimensionError("bound and predictor report differ in dimension");
  }
  if (bound.kind == BoundKind::PredictionMstep && bound.horizon != report.horizon) {
    throw HorizonError("bound and predictor report differ in horizon");
  }
  return gap_report(bound, report.det_error_cov, report.det_std_error, diagnostics, report.predictor);
}

void cross_check(Bound& bound, const std::string& name, const InfoEstimate& closed_form, const InfoEstimate& knn) {
  bound.inputs.emplace_back(name + "_closed_form", closed_form.value);
  bound.inputs.emplace_back(name + "_knn", knn.value);
  if (std::fabs(closed_form.value - knn.value) > 0.1) bound.add_flag(flag::kRouteDisagreement);
}

}  // namespace varbound
