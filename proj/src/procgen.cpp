#include "varbound/procgen.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "varbound/errors.hpp"
#include "varbound/parallel.hpp"

namespace varbound {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Matrix companion(const std::vector<Matrix>& coeffs, std::size_t n, double sign) {
  const auto order = static_cast<Eigen::Index>(coeffs.size());
  const auto dim = static_cast<Eigen::Index>(n);
  Matrix c = Matrix::Zero(order * dim, order * dim);
  for (Eigen::Index i = 0; i < order; ++i) {
    c.block(0, i * dim, dim, dim) = sign * coeffs[static_cast<std::size_t>(i)];
  }
  if (order > 1) c.block(dim, 0, (order - 1) * dim, (order - 1) * dim).setIdentity();
  return c;
}

double spectral_radius(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> solver(m, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_symmetric_psd(const Matrix& m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    return false;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff() >= -tol;
}

// Symmetric factor L with L L^T = cov; Cholesky when definite.
Matrix covariance_factor(const Matrix& cov) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  const Vector root = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * root.asDiagonal();
}

void check_square(const std::vector<Matrix>& coeffs, std::size_t n, const char* what) {
  for (const auto& m : coeffs) {
    if (static_cast<std::size_t>(m.rows()) != n || static_cast<std::size_t>(m.cols()) != n) {
      throw DimensionError(std::string(what) + " coefficient is not dim x dim");
    }
  }
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::Gaussian:
      return "gaussian";
    case Family::Laplace:
      return "laplace";
    case Family::Uniform:
      return "uniform";
    case Family::StudentT:
      return "student_t";
  }
  return "unknown";
}

Family family_from_string(const std::string& s) {
  if (s == "gaussian") return Family::Gaussian;
  if (s == "laplace") return Family::Laplace;
  if (s == "uniform") return Family::Uniform;
  if (s == "student_t") return Family::StudentT;
  throw ConfigError("unknown innovation family '" + s + "'");
}

InnovationSpec InnovationSpec::scalar(Family family, double variance, double nu) {
  InnovationSpec spec;
  spec.family = family;
  spec.nu = nu;
  spec.cov = Matrix::Constant(1, 1, variance);
  return spec;
}

InnovationSpec InnovationSpec::vector(Family family, Matrix cov, double nu) {
  InnovationSpec spec;
  spec.family = family;
  spec.nu = nu;
  spec.cov = std::move(cov);
  return spec;
}

void InnovationSpec::validate() const {
  if (family == Family::StudentT && !(nu > 2.0)) {
    throw DistributionError("student_t requires nu > 2 for finite variance, got " + std::to_string(nu));
  }
  if (!is_symmetric_psd(cov, 1e-10)) {
    throw DistributionError("innovation covariance must be symmetric positive semidefinite");
  }
  if (cov.diagonal().minCoeff() <= 0.0) {
    throw DistributionError("innovation variance must be positive in every channel");
  }
}

ProcessModel ProcessModel::arma(std::vector<double> ar, std::vector<double> ma,
                                InnovationSpec innovation) {
  ProcessModel model;
  model.dim = 1;
  for (double a : ar) model.ar.push_back(Matrix::Constant(1, 1, a));
  for (double b : ma) model.ma.push_back(Matrix::Constant(1, 1, b));
  model.innovation = std::move(innovation);
  return model;
}

ProcessModel ProcessModel::white(InnovationSpec innovation) {
  ProcessModel model;
  model.dim = innovation.dim();
  model.innovation = std::move(innovation);
  return model;
}

void ProcessModel::validate() const {
  if (dim == 0) throw DimensionError("process dimension must be positive");
  if (innovation.dim() != dim) throw DimensionError("innovation covariance does not match process dimension");
  check_square(ar, dim, "AR");
  check_square(ma, dim, "MA");
  innovation.validate();
}

double ar_spectral_radius(const ProcessModel& model) {
  return spectral_radius(companion(model.ar, model.dim, 1.0));
}

double ma_spectral_radius(const ProcessModel& model) {
  return spectral_radius(companion(model.ma, model.dim, -1.0));
}

bool is_stable(const ProcessModel& model) {
  return ar_spectral_radius(model) * (1.0 + kStabilityMargin) < 1.0;
}

bool is_invertible(const ProcessModel& model) {
  return ma_spectral_radius(model) * (1.0 + kStabilityMargin) < 1.0;
}

void require_stable(const ProcessModel& model) {
  model.validate();
  if (!is_stable(model)) {
    throw StabilityError("AR characteristic roots within 1e-8 of the unit circle (companion radius " +
                         std::to_string(ar_spectral_radius(model)) + ")");
  }
}

void require_invertible(const ProcessModel& model) {
  if (!is_invertible(model)) {
    throw StabilityError("MA polynomial is not invertible (companion radius " +
                         std::to_string(ma_spectral_radius(model)) + ")");
  }
}

std::size_t default_burn_in(const ProcessModel& model, std::size_t depth) {
  std::size_t burn = 10 * (model.p() + model.q() + depth);
  const double rho = ar_spectral_radius(model);
  if (rho > 0.0 && rho < 1.0) {
    const double needed = std::log(1e-17) / std::log(rho);
    burn = std::max(burn, static_cast<std::size_t>(std::ceil(needed)));
  }
  return burn;
}

InnovationSampler::InnovationSampler(const InnovationSpec& spec, std::uint64_t seed,
                                     std::uint64_t stream)
    : spec_(spec),
      factor_(covariance_factor(spec.cov)),
      scratch_(spec.dim()),
      engine_(splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL))),
      student_(spec.family == Family::StudentT ? spec.nu : 3.0) {}

double InnovationSampler::standard_draw() {
  switch (spec_.family) {
    case Family::Gaussian:
      return normal_(engine_);
    case Family::Laplace: {
      // scale 1/sqrt(2) gives unit variance
      double u = 0.0;
      do {
        u = uniform_(engine_);
      } while (u == 0.0);
      const double v = u - 0.5;
      const double mag = -std::log(1.0 - 2.0 * std::fabs(v)) / std::numbers::sqrt2;
      return v < 0.0 ? -mag : mag;
    }
    case Family::Uniform:
      return std::numbers::sqrt3 * (2.0 * uniform_(engine_) - 1.0);
    case Family::StudentT:
      return student_(engine_) * std::sqrt((spec_.nu - 2.0) / spec_.nu);
  }
  return 0.0;
}

void InnovationSampler::draw(double* out) {
  const auto n = scratch_.size();
  for (Eigen::Index i = 0; i < n; ++i) scratch_[i] = standard_draw();
  if (n == 1) {
    out[0] = factor_(0, 0) * scratch_[0];
    return;
  }
  Eigen::Map<Vector>(out, n).noalias() = factor_ * scratch_;
}

SampleSet simulate(const ProcessModel& model, std::size_t length, std::size_t paths,
                   std::uint64_t seed, std::optional<std::size_t> burn_in, unsigned workers) {
  require_stable(model);
  if (length == 0 || paths == 0) throw std::invalid_argument("simulate: length and paths must be >= 1");
  const std::size_t burn = burn_in.value_or(default_burn_in(model));
  const std::size_t n = model.dim;
  const std::size_t p = model.p();
  const std::size_t q = model.q();
  const std::size_t total = burn + length;

  SampleSet out(paths, length, n, seed, burn);
  parallel_for(paths, workers, [&](std::size_t path) {
    InnovationSampler sampler(model.innovation, seed, path);
    std::vector<double> x(total * n, 0.0);
    std::vector<double> e(total * n, 0.0);
    for (std::size_t k = 0; k < total; ++k) {
      double* xk = &x[k * n];
      double* ek = &e[k * n];
      sampler.draw(ek);
      for (std::size_t c = 0; c < n; ++c) xk[c] = ek[c];
      for (std::size_t i = 1; i <= p && i <= k; ++i) {
        const Matrix& a = model.ar[i - 1];
        const double* prev = &x[(k - i) * n];
        for (std::size_t r = 0; r < n; ++r) {
          double acc = 0.0;
          for (std::size_t c = 0; c < n; ++c) acc += a(r, c) * prev[c];
          xk[r] += acc;
        }
      }
      for (std::size_t j = 1; j <= q && j <= k; ++j) {
        const Matrix& b = model.ma[j - 1];
        const double* prev = &e[(k - j) * n];
        for (std::size_t r = 0; r < n; ++r) {
          double acc = 0.0;
          for (std::size_t c = 0; c < n; ++c) acc += b(r, c) * prev[c];
          xk[r] += acc;
        }
      }
    }
    auto dst = out.path(path);
    std::copy(x.begin() + static_cast<std::ptrdiff_t>(burn * n), x.end(), dst.begin());
  });
  if (!out.all_finite()) throw DivergenceError("simulation produced non-finite samples");
  return out;
}

std::vector<Matrix> psi_weights(const ProcessModel& model, std::size_t count) {
  const auto n = static_cast<Eigen::Index>(model.dim);
  std::vector<Matrix> psi;
  psi.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    Matrix w = j == 0 ? Matrix(Matrix::Identity(n, n))
                      : (j <= model.q() ? model.ma[j - 1] : Matrix(Matrix::Zero(n, n)));
    for (std::size_t i = 1; i <= model.p() && i <= j; ++i) w += model.ar[i - 1] * psi[j - i];
    psi.push_back(std::move(w));
  }
  return psi;
}

AutocovSequence theoretical_autocov(const ProcessModel& model, std::size_t max_lag) {
  require_stable(model);
  const auto n = static_cast<Eigen::Index>(model.dim);
  const auto p_blocks = static_cast<Eigen::Index>(std::max<std::size_t>(model.p(), 1));
  const auto q_blocks = static_cast<Eigen::Index>(model.q());
  const Eigen::Index s = n * (p_blocks + q_blocks);

  // State s_t = (x_t .. x_{t-P+1}, e_t .. e_{t-q+1}) with s_{t+1} = F s_t + G e_{t+1}.
  Matrix f = Matrix::Zero(s, s);
  Matrix g = Matrix::Zero(s, n);
  for (std::size_t i = 0; i < model.p(); ++i) f.block(0, static_cast<Eigen::Index>(i) * n, n, n) = model.ar[i];
  for (std::size_t j = 0; j < model.q(); ++j) {
    f.block(0, (p_blocks + static_cast<Eigen::Index>(j)) * n, n, n) = model.ma[j];
  }
  if (p_blocks > 1) f.block(n, 0, (p_blocks - 1) * n, (p_blocks - 1) * n).setIdentity();
  g.block(0, 0, n, n).setIdentity();
  if (q_blocks > 0) {
    g.block(p_blocks * n, 0, n, n).setIdentity();
    if (q_blocks > 1) {
      f.block((p_blocks + 1) * n, p_blocks * n, (q_blocks - 1) * n, (q_blocks - 1) * n).setIdentity();
    }
  }

  // Stationary state covariance P = F P F^T + G Sigma G^T by Smith doubling.
  Matrix cov = g * model.innovation.cov * g.transpose();
  Matrix power = f;
  for (int iter = 0; iter < 128; ++iter) {
    const Matrix increment = power * cov * power.transpose();
    cov += increment;
    power = power * power;
    if (increment.cwiseAbs().maxCoeff() <= 1e-18 * cov.cwiseAbs().maxCoeff()) break;
  }
  cov = 0.5 * (cov + cov.transpose());

  AutocovSequence out;
  out.dim = model.dim;
  out.source = AutocovSequence::Source::Theoretical;
  out.values.reserve(max_lag + 1);
  // E[s_t s_{t+h}^T] = P (F^h)^T
  Matrix cross = cov;
  for (std::size_t h = 0; h <= max_lag; ++h) {
    out.values.push_back(cross.topLeftCorner(n, n));
    cross = cross * f.transpose();
  }
  return out;
}

SpectrumGrid theoretical_spectrum(const ProcessModel& model, std::size_t n_freq) {
  require_stable(model);
  if (n_freq < 2 * (model.p() + model.q() + 1)) {
    throw std::invalid_argument("theoretical_spectrum: n_freq must be >= 2(p + q + 1)");
  }
  const auto n = static_cast<Eigen::Index>(model.dim);
  const CMatrix sigma = model.innovation.cov.cast<Complex>();
  SpectrumGrid grid;
  grid.dim = model.dim;
  grid.values.resize(n_freq);
  for (std::size_t j = 0; j < n_freq; ++j) {
    const double w = grid.frequency(j);
    // Phi(w) = H(e^{jw}) Sigma H(e^{jw})^H for R(k) = E[x_i x_{i+k}^T]
    CMatrix a = CMatrix::Identity(n, n);
    CMatrix b = CMatrix::Identity(n, n);
    for (std::size_t i = 0; i < model.p(); ++i) {
      a -= model.ar[i].cast<Complex>() * std::polar(1.0, w * static_cast<double>(i + 1));
    }
    for (std::size_t i = 0; i < model.q(); ++i) {
      b += model.ma[i].cast<Complex>() * std::polar(1.0, w * static_cast<double>(i + 1));
    }
    if (n == 1) {
      const double mag = std::norm(b(0, 0)) / std::norm(a(0, 0));
      grid.values[j] = CMatrix::Constant(1, 1, Complex(mag * sigma(0, 0).real(), 0.0));
      continue;
    }
    const CMatrix h = a.partialPivLu().solve(b);
    CMatrix phi = h * sigma * h.adjoint();
    grid.values[j] = 0.5 * (phi + phi.adjoint());
  }
  return grid;
}

std::string to_string(RecursiveSpec::GForm g) {
  switch (g) {
    case RecursiveSpec::GForm::Difference:
      return "difference";
    case RecursiveSpec::GForm::Identity:
      return "identity";
    case RecursiveSpec::GForm::SecondDifference:
      return "second_difference";
  }
  return "unknown";
}

std::string to_string(RecursiveSpec::FForm f) {
  switch (f) {
    case RecursiveSpec::FForm::Zero:
      return "zero";
    case RecursiveSpec::FForm::Linear:
      return "linear";
    case RecursiveSpec::FForm::SaturatedLinear:
      return "saturated_linear";
  }
  return "unknown";
}

void RecursiveSpec::validate() const {
  noise.validate();
  if (f_form != FForm::Zero) {
    const auto n = static_cast<Eigen::Index>(dim());
    if (gain.rows() != n || gain.cols() != n) throw DimensionError("recursive gain K must be dim x dim");
  }
  if (f_form == FForm::SaturatedLinear && cap < 0.0) {
    throw std::invalid_argument("saturation cap must be >= 0");
  }
}

RecursiveRun simulate_recursive(const RecursiveSpec& spec, std::size_t length, std::size_t paths,
                                std::uint64_t seed, unsigned workers) {
  spec.validate();
  if (length == 0 || paths == 0) throw std::invalid_argument("simulate_recursive: length and paths must be >= 1");
  const std::size_t n = spec.dim();
  RecursiveRun run{SampleSet(paths, length, n, seed), SampleSet(paths, length, n, seed),
                   SampleSet(paths, length, n, seed)};

  parallel_for(paths, workers, [&](std::size_t path) {
    InnovationSampler sampler(spec.noise, seed, path);
    Vector prev = Vector::Zero(static_cast<Eigen::Index>(n));  // x_{k-1}
    Vector cur = Vector::Zero(static_cast<Eigen::Index>(n));   // x_k
    Vector noise(static_cast<Eigen::Index>(n));
    Vector f(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < length; ++k) {
      sampler.draw(noise.data());
      switch (spec.f_form) {
        case RecursiveSpec::FForm::Zero:
          f.setZero();
          break;
        case RecursiveSpec::FForm::Linear:
          f.noalias() = spec.gain * cur;
          break;
        case RecursiveSpec::FForm::SaturatedLinear:
          f.noalias() = spec.gain * cur;
          f = f.cwiseMax(-spec.cap).cwiseMin(spec.cap);
          break;
      }
      const Vector g = f + noise;
      Vector next;
      switch (spec.g_form) {
        case RecursiveSpec::GForm::Difference:
          next = cur + g;
          break;
        case RecursiveSpec::GForm::Identity:
          next = g;
          break;
        case RecursiveSpec::GForm::SecondDifference:
          next = 2.0 * cur - prev + g;
          break;
      }
      if (!next.allFinite() || next.cwiseAbs().maxCoeff() > kDivergenceGuard) {
        throw DivergenceError("recursive state exceeded 1e12 at step " + std::to_string(k + 1));
      }
      for (std::size_t c = 0; c < n; ++c) {
        const auto ci = static_cast<Eigen::Index>(c);
        run.states.at(path, k, c) = next[ci];
        run.g_values.at(path, k, c) = g[ci];
        run.noise.at(path, k, c) = noise[ci];
      }
      prev = cur;
      cur = next;
    }
  });
  return run;
}

}  // namespace varbound
