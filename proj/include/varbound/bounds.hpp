#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "varbound/diagnostics.hpp"
#include "varbound/infotheory.hpp"
#include "varbound/predict.hpp"
#include "varbound/procgen.hpp"
#include "varbound/types.hpp"

namespace varbound {

enum class BoundKind {
  Estimation,
  Prediction1Step,
  PredictionMstep,
  Ks,
  Wm,
  NonGaussian,
  Recursive,
  Learning,
  EntropyPowerCap
};

std::string to_string(BoundKind k);

namespace flag {
inline constexpr std::string_view kDegenerate = "degenerate";
inline constexpr std::string_view kSingularSpectrum = "singular_spectrum";
inline constexpr std::string_view kRouteDisagreement = "route_disagreement";
}  // namespace flag

// A lower bound on det E[e e^T] (a variance when dim = 1).
struct Bound {
  BoundKind kind = BoundKind::Ks;
  std::size_t dim = 1;
  std::size_t horizon = 1;
  double value = 0.0;
  double std_error = 0.0;  // propagated from the entropy inputs
  std::vector<std::string> flags;
  std::vector<std::pair<std::string, double>> inputs;  // provenance, bits unless noted

  bool degenerate() const;
  bool has_flag(std::string_view f) const;
  void add_flag(std::string_view f);
};

// (2 pi e)^{-n} 2^{2h}. Saturated input gives a degenerate 0.
Bound estimation_bound(const InfoEstimate& h_cond, std::size_t n);

// 2^{(1/2pi) int log2 S}; a floored spectrum gives a degenerate 0.
Bound ks_bound(const SpectrumGrid& spec);
// 2^{(1/2pi) int log2 det Phi}.
Bound wm_bound(const SpectrumGrid& spec);
// ks_bound for scalar spectra, wm_bound otherwise.
Bound one_step_bound(const SpectrumGrid& spec);

// one_step * 2^{2 I}. For I = 0 the value is the one-step value unchanged.
Bound mstep_bound(const Bound& one_step, std::size_t m, const InfoEstimate& mi_term);
// Theoretical spectrum plus the closed-form Gaussian conditional MI.
Bound mstep_bound(const ProcessModel& model, std::size_t m, std::size_t n_freq = 4096);
// one_step + (2 pi e)^{-n} 2^{2 I}: the additive composition as printed in
// the source, kept for comparison only.
double mstep_bound_additive(const Bound& one_step, const InfoEstimate& mi_term);

// Worst-case ceiling (2 pi e)^{-n} 2^{2 h(x_k)} in determinant form; for
// n = 1 this is the entropy power.
Bound entropy_power_cap(const InfoEstimate& h_marginal, std::size_t n);

// 2^{-2J} * one-step bound.
Bound nongaussian_bound(const SpectrumGrid& spec, const InfoEstimate& j_rate);

// (2 pi e)^{-n} 2^{2 h(n_k | past noise)}, n the state dimension.
Bound recursive_bound(const InfoEstimate& noise_entropy_rate, std::size_t n);

// (2 pi e)^{-n} 2^{2 h(y_test | x_test, training data)}.
Bound learning_bound(const InfoEstimate& h_cond);

// Conjugate-Gaussian regression y = theta x + v with theta ~ N(0, prior_var)
// and v ~ N(0, noise_var). Training inputs and the test input are fixed;
// every draw resamples theta, the training noise and the test noise.
struct LearningDemo {
  std::size_t n_train = 50;
  double prior_var = 1.0;
  double noise_var = 0.1;
  double ridge_lambda = 0.1;  // noise_var / prior_var: the matched prior
  std::size_t draws = 10000;
  std::uint64_t seed = 0;
};

struct LearningDemoResult {
  std::vector<double> x_train;
  double x_test = 0.0;
  double predictive_var = 0.0;  // closed form
  Bound bound;                  // from the closed-form conditional entropy
  double achieved = 0.0;        // ridge test MSE over the draws
  double achieved_std_error = 0.0;
};

LearningDemoResult run_learning_demo(const LearningDemo& demo);

enum class Verdict { Equality, Strict, Degenerate };
std::string to_string(Verdict v);

inline constexpr double kEqualityTolerance = 0.03;
inline constexpr double kNumericalSlack = 1e-9;

struct BoundReport {
  Bound bound;
  std::string predictor;
  double achieved = 0.0;
  double achieved_std_error = 0.0;
  double gap_ratio = 0.0;
  double eps_mc = 0.0;  // 3 * combined relative Monte-Carlo SE
  Verdict verdict = Verdict::Strict;
  bool diagnostics_pass = false;
  std::vector<DiagnosticVerdict> diagnostics;
};

// gap_ratio = achieved / bound. Throws BoundViolationError when
// gap_ratio < 1 - eps_mc. Verdict is equality when gap_ratio <=
// 1 + max(eps_mc, 0.03) and every diagnostic passes.
BoundReport gap_report(const Bound& bound, double achieved, double achieved_std_error,
                       std::span<const DiagnosticVerdict> diagnostics, std::string predictor = {});
BoundReport gap_report(const Bound& bound, const PredictorReport& report,
                       std::span<const DiagnosticVerdict> diagnostics);

// Records both routes of an entropy input and flags a disagreement above
// 0.1 bits.
void cross_check(Bound& bound, const std::string& name, const InfoEstimate& closed_form,
                 const InfoEstimate& knn);

}  // namespace varbound
