#pragma once

#include <optional>
#include <string>
#include <vector>

#include "varbound/infotheory.hpp"
#include "varbound/predict.hpp"
#include "varbound/types.hpp"

namespace varbound {

enum class DiagnosticTest { LjungBox, JarqueBera, InnovationIndependence, ColoredOrder };

std::string to_string(DiagnosticTest t);

struct DiagnosticVerdict {
  DiagnosticTest test = DiagnosticTest::LjungBox;
  std::size_t horizon = 1;       // first lag examined
  double statistic = 0.0;        // Q, JB, or MI in bits
  std::optional<double> p_value;  // chi-square tests only
  double threshold = 0.0;        // MI tests only
  double std_error = 0.0;        // MI tests only
  std::size_t dof = 0;
  double alpha = 0.05;
  bool pass = false;
  std::vector<std::string> flags;

  std::string label() const;
};

inline constexpr double kDefaultAlpha = 0.05;
inline constexpr double kMiPassBits = 0.02;
inline constexpr std::size_t kDefaultLjungBoxLags = 20;
inline constexpr std::size_t kDefaultEmbedDepth = 2;
inline constexpr std::size_t kDefaultDiagnosticPoints = 20000;

// Multivariate portmanteau (Hosking) pooled over paths, on lags
// first_lag .. first_lag + n_lags - 1, against chi-square(n^2 * n_lags).
// For first_lag > 1 the statistic is rescaled by the Bartlett variance of
// an MA(first_lag - 1) null.
// Requires length > 10 * n_lags.
DiagnosticVerdict ljung_box(const SampleSet& innovations, std::size_t n_lags = kDefaultLjungBoxLags,
                            double alpha = kDefaultAlpha, std::size_t first_lag = 1);

// Channels whitened by the sample covariance, then skewness and kurtosis
// pooled per channel against chi-square(2n). Requires >= 1000 samples.
// ma_order > 0 rescales both moments by their Bartlett variance under an
// MA(ma_order) series.
DiagnosticVerdict jarque_bera(const SampleSet& innovations, double alpha = kDefaultAlpha,
                              std::size_t ma_order = 0);

struct MiTestOptions {
  std::size_t depth = kDefaultEmbedDepth;
  KnnOptions knn{};
  std::size_t max_points = kDefaultDiagnosticPoints;
};

// KSG MI between e_t and (past_{t-1}, ..., past_{t-p}); passes when the
// estimate is below 0.02 bits + 2 SE. Saturation fails automatically.
DiagnosticVerdict innovation_independence(const SampleSet& innovations, const SampleSet& past,
                                          const MiTestOptions& opts = {});

// MI between e_t and (e_{t-m}, ..., e_{t-m-p+1}). For m = 1 this is
// innovation_independence(innovations, innovations).
DiagnosticVerdict colored_order_check(const SampleSet& innovations, std::size_t m,
                                      const MiTestOptions& opts = {});

struct WhiteningVerdict {
  bool pass = false;
  std::vector<DiagnosticVerdict> parts;
};

// Jarque-Bera, Ljung-Box and the MI independence test on the tail of the
// report's innovations. For horizon m > 1 the whiteness tests start at
// lag m, since m-step errors are correlated up to lag m - 1.
WhiteningVerdict gaussian_whitening_check(const PredictorReport& report, const SampleSet& samples,
                                          double alpha = kDefaultAlpha, const MiTestOptions& opts = {});

}  // namespace varbound
