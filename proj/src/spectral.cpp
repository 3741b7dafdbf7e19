#include "varbound/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <unsupported/Eigen/FFT>

#include "varbound/errors.hpp"
#include "varbound/parallel.hpp"
#include "varbound/simd/kernels.hpp"

namespace varbound {
namespace {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

double hermitian_defect(const CMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace

AutocovSequence estimate_autocov(const SampleSet& samples, std::size_t max_lag, unsigned workers) {
  const std::size_t len = samples.length();
  if (4 * max_lag >= len) {
    throw LagError("max_lag " + std::to_string(max_lag) + " must be < length/4 (length " +
                   std::to_string(len) + ")");
  }
  const std::size_t n = samples.dim();
  const auto ni = static_cast<Eigen::Index>(n);

  // per-path sums, reduced afterwards in path order
  std::vector<std::vector<Matrix>> per_path(samples.paths());
  parallel_for(samples.paths(), workers, [&](std::size_t p) {
    std::vector<std::vector<double>> chan(n);
    for (std::size_t c = 0; c < n; ++c) chan[c] = samples.channel(p, c);
    auto& out = per_path[p];
    out.assign(max_lag + 1, Matrix::Zero(ni, ni));
    for (std::size_t k = 0; k <= max_lag; ++k) {
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
          // R_ab(k) = (1/N) sum_t x_a(t) x_b(t + k)
          out[k](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
              simd::active().dot(chan[a].data(), chan[b].data() + k, len - k);
        }
      }
    }
  });

  AutocovSequence acv;
  acv.dim = n;
  acv.source = AutocovSequence::Source::Estimated;
  acv.sample_count = samples.paths() * len;
  acv.values.assign(max_lag + 1, Matrix::Zero(ni, ni));
  for (const auto& path : per_path) {
    for (std::size_t k = 0; k <= max_lag; ++k) acv.values[k] += path[k];
  }
  const double scale = 1.0 / (static_cast<double>(len) * static_cast<double>(samples.paths()));
  for (auto& m : acv.values) m *= scale;
  return acv;
}

SpectrumGrid welch_spectrum(const SampleSet& samples, std::size_t segment_len, double overlap,
                            std::size_t n_freq) {
  if (segment_len == 0 || segment_len > samples.length()) {
    throw SegmentError("segment_len must be in [1, length]");
  }
  if (!(overlap >= 0.0 && overlap < 1.0)) throw SegmentError("overlap must be in [0, 1)");
  if (n_freq < 2) throw std::invalid_argument("welch_spectrum: n_freq must be >= 2");

  const std::size_t n = samples.dim();
  const auto ni = static_cast<Eigen::Index>(n);
  const std::size_t hop =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(static_cast<double>(segment_len) * (1.0 - overlap))));
  const std::size_t segments = 1 + (samples.length() - segment_len) / hop;

  std::vector<double> window(segment_len, 1.0);
  if (segment_len > 1) {
    for (std::size_t t = 0; t < segment_len; ++t) {
      window[t] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(t) /
                                         static_cast<double>(segment_len - 1)));
    }
  }
  double window_power = 0.0;
  for (double w : window) window_power += w * w;

  SpectrumGrid grid;
  grid.dim = n;
  grid.values.assign(n_freq, CMatrix::Zero(ni, ni));

  Eigen::FFT<double> fft;
  std::vector<Complex> folded(n_freq);
  std::vector<std::vector<Complex>> spectra(n, std::vector<Complex>(n_freq));
  for (std::size_t p = 0; p < samples.paths(); ++p) {
    for (std::size_t s = 0; s < segments; ++s) {
      const std::size_t start = s * hop;
      for (std::size_t c = 0; c < n; ++c) {
        std::fill(folded.begin(), folded.end(), Complex(0.0, 0.0));
        // (-1)^t shifts the DFT bins onto w_j = -pi + 2 pi j / N; folding
        // modulo N samples the segment's DTFT exactly at those bins.
        for (std::size_t t = 0; t < segment_len; ++t) {
          const double sign = (t & 1U) ? -1.0 : 1.0;
          folded[t % n_freq] += sign * window[t] * samples.at(p, start + t, c);
        }
        fft.fwd(spectra[c], folded);
      }
      for (std::size_t j = 0; j < n_freq; ++j) {
        for (std::size_t a = 0; a < n; ++a) {
          for (std::size_t b = 0; b < n; ++b) {
            grid.values[j](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) +=
                std::conj(spectra[a][j]) * spectra[b][j];
          }
        }
      }
    }
  }
  const double scale = 1.0 / (window_power * static_cast<double>(segments * samples.paths()));
  for (auto& m : grid.values) m *= scale;
  return grid;
}

LogIntegral log_spectrum_integral(const SpectrumGrid& spec) {
  if (spec.dim != 1) throw DimensionError("log_spectrum_integral needs a scalar spectrum; use logdet");
  if (spec.size() == 0) throw std::invalid_argument("empty spectrum grid");
  LogIntegral out;
  double acc = 0.0;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    double s = spec.scalar(j);
    if (!(s >= kSpectrumFloor)) {
      out.floored = true;
      s = kSpectrumFloor;
    }
    acc += std::log2(s);
  }
  // Trapezoid on a uniform periodic grid reduces to the grid mean.
  out.bits = acc / static_cast<double>(spec.size());
  return out;
}

LogIntegral logdet_spectrum_integral(const SpectrumGrid& spec) {
  if (spec.size() == 0) throw std::invalid_argument("empty spectrum grid");
  LogIntegral out;
  double acc = 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    const CMatrix& phi = spec.values[j];
    if (hermitian_defect(phi) > 1e-10 * std::max(1.0, phi.cwiseAbs().maxCoeff())) {
      throw MatrixError("spectral matrix at grid point " + std::to_string(j) + " is not Hermitian");
    }
    if (spec.dim == 1) {
      double s = phi(0, 0).real();
      if (!(s >= kSpectrumFloor)) {
        out.floored = true;
        s = kSpectrumFloor;
      }
      acc += std::log2(s);
      continue;
    }
    solver.compute(phi, Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
      double lambda = solver.eigenvalues()[i];
      if (!(lambda >= kSpectrumFloor)) {
        out.floored = true;
        lambda = kSpectrumFloor;
      }
      acc += std::log2(lambda);
    }
  }
  out.bits = acc / static_cast<double>(spec.size());
  return out;
}

MinimumPhaseFactor spectral_factorize(const SpectrumGrid& spec) {
  if (spec.dim != 1) throw DimensionError("spectral_factorize supports scalar spectra only");
  const std::size_t n = spec.size();
  if (n < 2) throw std::invalid_argument("spectral_factorize: grid too small");

  std::vector<Complex> log_s(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = spec.scalar(j);
    if (!(s >= kSpectrumFloor)) {
      throw SingularSpectrumError("spectrum falls below the floor; process has a deterministic component");
    }
    log_s[j] = std::log(s);
  }

  Eigen::FFT<double> fft;
  std::vector<Complex> cep;
  fft.inv(cep, log_s);  // includes 1/N

  // Causal half of the (real, even) cepstrum; grid offset -pi contributes (-1)^k.
  const std::size_t m = std::max(kMinCepstralLength, next_pow2(n));
  std::vector<Complex> causal(m, Complex(0.0, 0.0));
  causal[0] = 0.5 * cep[0].real();
  const std::size_t half = n / 2;
  for (std::size_t k = 1; k <= half; ++k) {
    const double sign = (k & 1U) ? -1.0 : 1.0;
    double value = sign * cep[k].real();
    if (2 * k == n) value *= 0.5;  // Nyquist term is shared by +k and -k
    causal[k] = value;
  }

  std::vector<Complex> log_c;
  fft.fwd(log_c, causal);
  for (auto& v : log_c) v = std::exp(v);
  std::vector<Complex> coeffs;
  fft.inv(coeffs, log_c);

  MinimumPhaseFactor out;
  const double c0 = coeffs[0].real();
  std::size_t last = 0;
  for (std::size_t k = 0; k < m / 2; ++k) {
    if (std::fabs(coeffs[k].real()) > 1e-13 * std::fabs(c0)) last = k;
  }
  out.coeffs.reserve(last + 1);
  for (std::size_t k = 0; k <= last; ++k) out.coeffs.push_back(coeffs[k].real());
  out.gain = c0;
  return out;
}

SpectrumGrid factor_spectrum(const MinimumPhaseFactor& factor, std::size_t n_freq) {
  std::vector<double> s(n_freq);
  SpectrumGrid grid;
  grid.values.resize(n_freq);
  for (std::size_t j = 0; j < n_freq; ++j) {
    const double w = grid.frequency(j);
    Complex acc(0.0, 0.0);
    for (std::size_t k = 0; k < factor.coeffs.size(); ++k) {
      acc += factor.coeffs[k] * std::polar(1.0, -w * static_cast<double>(k));
    }
    s[j] = std::norm(acc);
  }
  return SpectrumGrid::from_scalar(s);
}

}  // namespace varbound
