#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "varbound/types.hpp"

namespace varbound {

enum class Family { Gaussian, Laplace, Uniform, StudentT };

std::string to_string(Family f);
Family family_from_string(const std::string& s);

// Innovation / noise law. Every family is affinely rescaled so draws have
// zero mean and exactly the requested covariance.
struct InnovationSpec {
  Family family = Family::Gaussian;
  double nu = 0.0;  // student-t degrees of freedom
  Matrix cov = Matrix::Identity(1, 1);

  static InnovationSpec scalar(Family family, double variance, double nu = 0.0);
  static InnovationSpec vector(Family family, Matrix cov, double nu = 0.0);

  std::size_t dim() const { return static_cast<std::size_t>(cov.rows()); }
  bool gaussian() const { return family == Family::Gaussian; }
  // Throws DistributionError for nu <= 2, non-PSD or non-positive covariance.
  void validate() const;
};

// x_k = sum_i a_i x_{k-i} + e_k + sum_j b_j e_{k-j}
struct ProcessModel {
  std::size_t dim = 1;
  std::vector<Matrix> ar;
  std::vector<Matrix> ma;
  InnovationSpec innovation;

  static ProcessModel arma(std::vector<double> ar, std::vector<double> ma,
                           InnovationSpec innovation);
  static ProcessModel white(InnovationSpec innovation);

  std::size_t p() const { return ar.size(); }
  std::size_t q() const { return ma.size(); }
  void validate() const;
};

inline constexpr double kStabilityMargin = 1e-8;

// Largest |lambda| of the AR (resp. MA) companion matrix; roots of the
// characteristic polynomial are the reciprocals.
double ar_spectral_radius(const ProcessModel& model);
double ma_spectral_radius(const ProcessModel& model);
bool is_stable(const ProcessModel& model);
bool is_invertible(const ProcessModel& model);
void require_stable(const ProcessModel& model);
void require_invertible(const ProcessModel& model);

// 10 * (p + q + depth), stretched so the transient decays below 1e-17.
std::size_t default_burn_in(const ProcessModel& model, std::size_t depth = 16);

SampleSet simulate(const ProcessModel& model, std::size_t length, std::size_t paths,
                   std::uint64_t seed, std::optional<std::size_t> burn_in = std::nullopt,
                   unsigned workers = 0);

AutocovSequence theoretical_autocov(const ProcessModel& model, std::size_t max_lag);

SpectrumGrid theoretical_spectrum(const ProcessModel& model, std::size_t n_freq);

// Impulse response psi_0 = I, psi_1, ... of the causal MA(inf) form.
std::vector<Matrix> psi_weights(const ProcessModel& model, std::size_t count);

// Per-path innovation stream. The engine is seeded from (seed, stream)
// through a splitmix64 mix, so each path owns an independent substream.
class InnovationSampler {
 public:
  InnovationSampler(const InnovationSpec& spec, std::uint64_t seed, std::uint64_t stream);
  void draw(double* out);

 private:
  InnovationSpec spec_;
  Matrix factor_;
  Vector scratch_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::student_t_distribution<double> student_;

  double standard_draw();
};

// --- Recursive systems: g_{k+1}(x_{0..k+1}) = f_k(x_{0..k}) + n_k

struct RecursiveSpec {
  enum class GForm { Difference, Identity, SecondDifference };
  enum class FForm { Zero, Linear, SaturatedLinear };

  GForm g_form = GForm::Difference;
  FForm f_form = FForm::Zero;
  Matrix gain;       // K for linear / saturated_linear
  double cap = 0.0;  // elementwise clamp for saturated_linear
  InnovationSpec noise;

  std::size_t dim() const { return noise.dim(); }
  void validate() const;
};

std::string to_string(RecursiveSpec::GForm g);
std::string to_string(RecursiveSpec::FForm f);

inline constexpr double kDivergenceGuard = 1e12;

struct RecursiveRun {
  SampleSet states;    // x_1 .. x_length
  SampleSet g_values;  // g_1 .. g_length
  SampleSet noise;     // n_0 .. n_{length-1}
};

RecursiveRun simulate_recursive(const RecursiveSpec& spec, std::size_t length,
                                std::size_t paths, std::uint64_t seed, unsigned workers = 0);

}  // namespace varbound
