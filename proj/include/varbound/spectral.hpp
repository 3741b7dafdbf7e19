#pragma once

#include <vector>

#include "varbound/types.hpp"

namespace varbound {

inline constexpr double kSpectrumFloor = 1e-12;
inline constexpr std::size_t kDefaultFreqGrid = 4096;
inline constexpr std::size_t kMinCepstralLength = 8192;

// Biased (divide-by-N) estimator averaged over paths. No mean is removed:
// processes are zero-mean by construction. Throws LagError unless
// max_lag < length / 4.
AutocovSequence estimate_autocov(const SampleSet& samples, std::size_t max_lag,
                                 unsigned workers = 0);

// Hann-windowed averaged periodogram on the standard grid, normalized so
// the grid mean equals the windowed sample power (an R(0) estimate).
SpectrumGrid welch_spectrum(const SampleSet& samples, std::size_t segment_len, double overlap,
                            std::size_t n_freq = kDefaultFreqGrid);

struct LogIntegral {
  double bits = 0.0;     // (1/2pi) * integral of log2(.) over [-pi, pi)
  bool floored = false;  // some value fell below kSpectrumFloor
};

// Scalar spectra only (DimensionError otherwise).
LogIntegral log_spectrum_integral(const SpectrumGrid& spec);
// log2 det Phi, flooring each eigenvalue; MatrixError on non-Hermitian input.
LogIntegral logdet_spectrum_integral(const SpectrumGrid& spec);

struct MinimumPhaseFactor {
  std::vector<double> coeffs;  // c_0 .. c_M, c_0 > 0, |C(e^{jw})|^2 = S(w)
  double gain = 0.0;           // c_0
};

// Kolmogorov cepstral method: exponentiate the causal part of the cepstrum
// of ln S. Throws SingularSpectrumError when the floor is hit.
MinimumPhaseFactor spectral_factorize(const SpectrumGrid& spec);

// |C(e^{jw})|^2 on the standard grid of n_freq points.
SpectrumGrid factor_spectrum(const MinimumPhaseFactor& factor, std::size_t n_freq);

}  // namespace varbound
