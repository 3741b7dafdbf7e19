#pragma once

#include <optional>
#include <string>
#include <vector>

#include "varbound/procgen.hpp"
#include "varbound/types.hpp"

namespace varbound {

inline constexpr double kDegenerateVarianceFloor = 1e-14;
inline constexpr double kDefaultTailFraction = 0.5;

struct LevinsonResult {
  std::vector<double> reflection;  // k_1 .. k_order
  std::vector<double> coeffs;      // a_1 .. a_order: xhat_k = sum_i a_i x_{k-i}
  std::vector<double> variances;   // v_0 .. v_order, nonincreasing
};

// Durbin recursion on a scalar autocovariance sequence. Throws
// DegenerateProcessError when some v_j < 1e-14 * R(0) (perfectly
// predictable) and MatrixError when the Toeplitz matrix is not PSD.
LevinsonResult levinson(const AutocovSequence& autocov, std::size_t order);

struct MultichannelLevinsonResult {
  std::vector<Matrix> coeffs;        // A_1 .. A_order: xhat_k = sum_i A_i x_{k-i}
  Matrix innovation_cov;             // V_order
  std::vector<double> det_sequence;  // det V_0 .. det V_order
};

// Whittle's forward/backward recursion on a block-Toeplitz autocovariance.
MultichannelLevinsonResult multichannel_levinson(const AutocovSequence& autocov, std::size_t order);

enum class PredictorKind { Levinson, MultichannelLevinson, ModelMstep, Truncated, Zero };

std::string to_string(PredictorKind kind);

// A causal predictor of horizon m. Linear kinds predict
//   xhat_k = sum_{i=1}^{order} C_i x_{k-m+1-i}
// so the prediction at k reads samples with index <= k - m only.
struct Predictor {
  PredictorKind kind = PredictorKind::Zero;
  std::size_t dim = 1;
  std::size_t order = 0;
  std::size_t horizon = 1;
  std::vector<Matrix> coeffs;
  std::optional<ProcessModel> model;  // ModelMstep only

  std::string label() const;
};

// Optimal order-`order` 1-step predictor; picks the multichannel recursion
// for vector autocovariances.
Predictor fit_levinson(const AutocovSequence& autocov, std::size_t order);
// Same fit, labelled as a deliberately under-ordered baseline.
Predictor fit_truncated(const AutocovSequence& autocov, std::size_t order);
Predictor zero_predictor(std::size_t dim, std::size_t horizon = 1);
Predictor model_predictor(const ProcessModel& model, std::size_t horizon);

struct PredictorReport {
  std::string predictor;
  std::size_t horizon = 1;
  SampleSet innovations;                // x_k - xhat_k, full length
  Matrix error_cov;                     // tail-averaged over paths
  double det_error_cov = 0.0;
  double det_std_error = 0.0;           // Monte-Carlo SE of det_error_cov
  std::vector<double> per_k_variance;   // trace / dim, averaged over paths
  std::size_t n_paths = 0;
  double tail_fraction = kDefaultTailFraction;
};

PredictorReport run_predictor(const Predictor& predictor, const SampleSet& samples,
                              double tail_fraction = kDefaultTailFraction, unsigned workers = 0);

// Iterates the generating model's conditional mean m steps ahead.
// HorizonError when m >= length / 2.
PredictorReport mstep_predict(const ProcessModel& model, const SampleSet& samples, std::size_t m,
                              double tail_fraction = kDefaultTailFraction, unsigned workers = 0);

// sum_{i<m} psi_i Sigma psi_i^T: the optimal linear m-step error covariance.
Matrix mstep_error_covariance(const ProcessModel& model, std::size_t m);

}  // namespace varbound
