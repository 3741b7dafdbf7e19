#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace varbound {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

inline constexpr double kTwoPiE = 2.0 * std::numbers::pi * std::numbers::e;

// Realizations of a (vector) process: paths x length x dim, stored
// contiguously with the channel index fastest.
class SampleSet {
 public:
  SampleSet() = default;
  SampleSet(std::size_t paths, std::size_t length, std::size_t dim,
            std::uint64_t seed = 0, std::size_t burn_in = 0);

  std::size_t paths() const { return paths_; }
  std::size_t length() const { return length_; }
  std::size_t dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t burn_in() const { return burn_in_; }

  double& at(std::size_t path, std::size_t k, std::size_t c = 0) {
    return data_[(path * length_ + k) * dim_ + c];
  }
  double at(std::size_t path, std::size_t k, std::size_t c = 0) const {
    return data_[(path * length_ + k) * dim_ + c];
  }

  // Interleaved samples of one path: length * dim values.
  std::span<double> path(std::size_t p) {
    return {data_.data() + p * length_ * dim_, length_ * dim_};
  }
  std::span<const double> path(std::size_t p) const {
    return {data_.data() + p * length_ * dim_, length_ * dim_};
  }

  // Contiguous copy of a single channel of one path.
  std::vector<double> channel(std::size_t p, std::size_t c) const;

  // Indices [begin, end) of every path.
  SampleSet slice(std::size_t begin, std::size_t end) const;
  // The last ceil(fraction * length) samples of every path.
  SampleSet tail(double fraction) const;

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool all_finite() const;
  bool operator==(const SampleSet&) const = default;

 private:
  std::size_t paths_ = 0;
  std::size_t length_ = 0;
  std::size_t dim_ = 0;
  std::uint64_t seed_ = 0;
  std::size_t burn_in_ = 0;
  std::vector<double> data_;
};

// R(k) = E[x_i x_{i+k}^T] for k = 0..max_lag.
struct AutocovSequence {
  enum class Source { Theoretical, Estimated };

  std::size_t dim = 1;
  std::vector<Matrix> values;
  Source source = Source::Theoretical;
  std::size_t sample_count = 0;

  std::size_t max_lag() const { return values.empty() ? 0 : values.size() - 1; }
  // Gamma(h) = E[x_{t+h} x_t^T] for any integer h.
  Matrix gamma(long h) const;
  // Covariance of the stacked vector (x_1, ..., x_blocks): block (i, j) is
  // Gamma(i - j).
  Matrix toeplitz(std::size_t blocks) const;
};

// Power spectrum Phi(w) = sum_k R(k) e^{-j w k} sampled at
// w_j = -pi + 2 pi j / N, j = 0..N-1.
struct SpectrumGrid {
  std::size_t dim = 1;
  std::vector<CMatrix> values;
  bool floored = false;

  std::size_t size() const { return values.size(); }
  double frequency(std::size_t j) const {
    return -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(j) /
                                   static_cast<double>(values.size());
  }
  // Scalar value at grid point j (dim must be 1).
  double scalar(std::size_t j) const { return values[j](0, 0).real(); }

  static SpectrumGrid from_scalar(std::span<const double> s);
};

}  // namespace varbound
