#include "varbound/types.hpp"

#include <cmath>
#include <stdexcept>

namespace varbound {

SampleSet::SampleSet(std::size_t paths, std::size_t length, std::size_t dim, std::uint64_t seed,
                     std::size_t burn_in)
    : paths_(paths),
      length_(length),
      dim_(dim),
      seed_(seed),
      burn_in_(burn_in),
      data_(paths * length * dim, 0.0) {}

std::vector<double> SampleSet::channel(std::size_t p, std::size_t c) const {
  std::vector<double> out(length_);
  for (std::size_t k = 0; k < length_; ++k) out[k] = at(p, k, c);
  return out;
}

SampleSet SampleSet::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > length_) throw std::out_of_range("SampleSet::slice");
  SampleSet out(paths_, end - begin, dim_, seed_, burn_in_ + begin);
  for (std::size_t p = 0; p < paths_; ++p) {
    const auto src = path(p).subspan(begin * dim_, (end - begin) * dim_);
    std::copy(src.begin(), src.end(), out.path(p).begin());
  }
  return out;
}

SampleSet SampleSet::tail(double fraction) const {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("tail fraction must be in (0, 1]");
  const auto keep = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(length_)));
  return slice(length_ - std::min(keep, length_), length_);
}

bool SampleSet::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Matrix AutocovSequence::gamma(long h) const {
  const auto lag = static_cast<std::size_t>(h < 0 ? -h : h);
  if (lag >= values.size()) throw std::out_of_range("autocovariance lag beyond max_lag");
  // R(k) = E[x_i x_{i+k}^T]; Gamma(h) = E[x_{t+h} x_t^T] = R(h)^T, Gamma(-h) = R(h).
  return h >= 0 ? Matrix(values[lag].transpose()) : values[lag];
}

Matrix AutocovSequence::toeplitz(std::size_t blocks) const {
  const auto n = static_cast<Eigen::Index>(dim);
  Matrix out(n * static_cast<Eigen::Index>(blocks), n * static_cast<Eigen::Index>(blocks));
  for (std::size_t i = 0; i < blocks; ++i) {
    for (std::size_t j = 0; j < blocks; ++j) {
      out.block(static_cast<Eigen::Index>(i) * n, static_cast<Eigen::Index>(j) * n, n, n) =
          gamma(static_cast<long>(i) - static_cast<long>(j));
    }
  }
  return out;
}

SpectrumGrid SpectrumGrid::from_scalar(std::span<const double> s) {
  SpectrumGrid grid;
  grid.dim = 1;
  grid.values.reserve(s.size());
  for (double v : s) grid.values.push_back(CMatrix::Constant(1, 1, Complex(v, 0.0)));
  return grid;
}

}  // namespace varbound
