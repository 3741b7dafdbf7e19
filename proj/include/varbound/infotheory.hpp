#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "varbound/procgen.hpp"
#include "varbound/types.hpp"

namespace varbound {

enum class Quantity { Entropy, ConditionalEntropy, EntropyRate, MutualInfo, NegentropyRate };
enum class Estimator { Knn, GaussianClosedForm, Spectral };

std::string to_string(Quantity q);
std::string to_string(Estimator e);

// Flags carried by estimates.
namespace flag {
inline constexpr std::string_view kSaturated = "saturated";
inline constexpr std::string_view kClamped = "clamped";
inline constexpr std::string_view kJittered = "jittered";
inline constexpr std::string_view kNotConverged = "not_converged";
inline constexpr std::string_view kConvergenceUnchecked = "convergence_unchecked";
inline constexpr std::string_view kDepthClamped = "depth_clamped";
}  // namespace flag

// An information quantity in bits.
struct InfoEstimate {
  double value = 0.0;
  Quantity quantity = Quantity::Entropy;
  Estimator estimator = Estimator::Knn;
  std::size_t k = 0;
  std::size_t n_samples = 0;
  std::size_t embedding_depth = 0;
  std::size_t dim = 1;  // dimension of the target variable
  double std_error = 0.0;
  std::vector<std::string> flags;

  bool has_flag(std::string_view f) const;
  void add_flag(std::string_view f);
};

// Row-major point cloud.
struct PointCloud {
  std::size_t dim = 1;
  std::vector<double> data;

  std::size_t size() const { return dim == 0 ? 0 : data.size() / dim; }
  static PointCloud from_scalar(std::vector<double> values);
  // Concatenates coordinates row by row: (a_i, b_i).
  static PointCloud join(const PointCloud& a, const PointCloud& b);
  PointCloud subset(const std::vector<std::size_t>& rows) const;
};

struct KnnOptions {
  std::size_t k = 4;
  std::size_t resamples = 20;  // half-samples for std_error; 0 disables
  std::uint64_t seed = 0;
  unsigned workers = 0;
};

inline constexpr std::size_t kMaxEntropyDim = 8;
inline constexpr double kRateConvergenceBits = 0.02;

// Kozachenko-Leonenko estimate (Euclidean balls, digamma correction).
// SampleSizeError unless n > 10k; DimensionError above 8 dimensions.
InfoEstimate knn_entropy(const PointCloud& points, const KnnOptions& opts = {});

// Kraskov-Stoegbauer-Grassberger estimator (type 1, max-norm), clamped at 0.
// Estimates above log2(n)/2 are flagged saturated and capped there.
InfoEstimate ksg_mutual_info(const PointCloud& x, const PointCloud& y, const KnnOptions& opts = {});

// h(x | y) = h(x, y) - h(y). Flagged saturated (deterministic dependence)
// when h(x) - h(x | y) exceeds log2(n)/2.
InfoEstimate conditional_entropy(const PointCloud& x, const PointCloud& y, const KnnOptions& opts = {});

// Rows (x_{t+l_1}, ..., x_{t+l_r}) of every path for t in [t_begin, t_end),
// thinned with a fixed stride to at most max_points rows.
PointCloud lagged_cloud(const SampleSet& samples, const std::vector<long>& lags, std::size_t t_begin,
                        std::size_t t_end, std::size_t max_points);

// Closed forms.
double gaussian_entropy_bits(const Matrix& cov);
// Variance of the Gaussian with the same entropy: (2 pi e)^{-1} 2^{2h/n}.
double entropy_power(double h_bits, std::size_t n);

// h_inf = (n/2) log2(2 pi e) + (1/2)(1/2pi) int log2 det Phi.
// SingularSpectrumError when the spectrum hits the floor.
InfoEstimate gaussian_entropy_rate(const SpectrumGrid& spec);

inline constexpr std::size_t kDefaultRateMaxPoints = 100000;

// h(x_k | x_{k-p..k-1}) by delay embedding; also estimates depth p+1 and
// flags not_converged when the two differ by 0.02 bits or more.
InfoEstimate empirical_entropy_rate(const SampleSet& samples, std::size_t depth,
                                    const KnnOptions& opts = {},
                                    std::size_t max_points = kDefaultRateMaxPoints);

// Raises the depth from 1 until consecutive estimates agree within 0.02
// bits or the depth reaches max_depth (clamped so the embedding stays
// within 8 dimensions).
InfoEstimate adaptive_entropy_rate(const SampleSet& samples, std::size_t max_depth,
                                   const KnnOptions& opts = {},
                                   std::size_t max_points = kDefaultRateMaxPoints);

// J = gaussian_entropy_rate(spec) - rate, clamped at 0 with a flag.
InfoEstimate negentropy_rate(const SpectrumGrid& spec, const InfoEstimate& rate);
InfoEstimate negentropy_rate(const SpectrumGrid& spec, const SampleSet& samples, std::size_t depth,
                             const KnnOptions& opts = {},
                             std::size_t max_points = kDefaultRateMaxPoints);

// I(x_k; x_{k-m+1..k-1} | x_{..k-m}) for a Gaussian linear model:
// (1/2) log2(det V_m / det V_1) with V_m the optimal m-step error covariance.
InfoEstimate gaussian_mstep_mi(const ProcessModel& model, std::size_t m);

// The same conditional MI estimated by k-NN with the far past truncated to
// `depth` samples: h(x_k | far) - h(x_k | far, near).
InfoEstimate empirical_mstep_mi(const SampleSet& samples, std::size_t m, std::size_t depth,
                                const KnnOptions& opts = {},
                                std::size_t max_points = kDefaultRateMaxPoints);

}  // namespace varbound
