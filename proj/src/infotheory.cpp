#include "varbound/infotheory.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "varbound/errors.hpp"
#include "varbound/knn_tree.hpp"
#include "varbound/parallel.hpp"
#include "varbound/predict.hpp"
#include "varbound/spectral.hpp"

namespace varbound {
namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kJitter = 1e-12;

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void check_sample_size(std::size_t n, std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be positive");
  if (n <= 10 * k) {
    throw SampleSizeError("need more than " + std::to_string(10 * k) + " samples for k = " +
                          std::to_string(k) + ", got " + std::to_string(n));
  }
}

void check_dim(std::size_t d) {
  if (d == 0) throw std::invalid_argument("point cloud has zero dimension");
  if (d > kMaxEntropyDim) {
    throw DimensionError("entropy estimation refused in dimension " + std::to_string(d) +
                         " (limit " + std::to_string(kMaxEntropyDim) + ")");
  }
}

// ln of the volume of the d-dimensional Euclidean unit ball.
double log_unit_ball(std::size_t d) {
  const double h = 0.5 * static_cast<double>(d);
  return h * std::log(std::numbers::pi) - std::lgamma(h + 1.0);
}

// Breaks exact ties so every k-NN radius is positive. Returns true when
// something had to be perturbed.
bool jitter_duplicates(PointCloud& cloud, std::uint64_t seed) {
  const std::size_t n = cloud.size();
  const std::size_t d = cloud.dim;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const double* p = cloud.data.data();
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(p + a * d, p + a * d + d, p + b * d, p + b * d + d);
  });
  bool dup = false;
  for (std::size_t i = 1; i < n && !dup; ++i) {
    dup = std::equal(p + idx[i] * d, p + idx[i] * d + d, p + idx[i - 1] * d);
  }
  if (!dup) return false;
  std::vector<double> scale(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) scale[c] = std::max(scale[c], std::fabs(p[i * d + c]));
  }
  std::mt19937_64 engine(mix(seed ^ 0x6a09e667f3bcc909ULL));
  std::normal_distribution<double> normal;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      const double s = scale[c] > 0.0 ? scale[c] : 1.0;
      cloud.data[i * d + c] += kJitter * s * normal(engine);
    }
  }
  return true;
}

// Kozachenko-Leonenko in nats; no validation.
double kl_nats(const PointCloud& cloud, std::size_t k, unsigned workers) {
  const std::size_t n = cloud.size();
  const std::size_t d = cloud.dim;
  KnnTree tree(cloud.data, d, Metric::Euclidean);
  std::vector<double> log_eps(n);
  parallel_for(n, workers, [&](std::size_t i) {
    log_eps[i] = std::log(tree.kth_neighbor_distance(i, k));
  });
  double acc = 0.0;
  for (double v : log_eps) acc += v;
  const auto nd = static_cast<double>(n);
  return boost::math::digamma(nd) - boost::math::digamma(static_cast<double>(k)) + log_unit_ball(d) +
         static_cast<double>(d) * acc / nd;
}

// psi(1..n) by recurrence.
std::vector<double> digamma_table(std::size_t n) {
  std::vector<double> t(n + 1, 0.0);
  t[1] = -std::numbers::egamma;
  for (std::size_t i = 2; i <= n; ++i) t[i] = t[i - 1] + 1.0 / static_cast<double>(i - 1);
  return t;
}

// KSG type 1 in nats; no validation.
double ksg_nats(const PointCloud& x, const PointCloud& y, std::size_t k, unsigned workers) {
  const std::size_t n = x.size();
  const PointCloud joint = PointCloud::join(x, y);
  KnnTree tj(joint.data, joint.dim, Metric::Chebyshev);
  KnnTree tx(x.data, x.dim, Metric::Chebyshev);
  KnnTree ty(y.data, y.dim, Metric::Chebyshev);
  const std::vector<double> psi = digamma_table(n);
  std::vector<double> term(n);
  parallel_for(n, workers, [&](std::size_t i) {
    const double eps = tj.kth_neighbor_distance(i, k);
    const std::size_t nx = tx.count_within(i, eps);
    const std::size_t ny = ty.count_within(i, eps);
    // order-independent so swapping x and y is exact
    term[i] = psi[std::min(nx, ny) + 1] + psi[std::max(nx, ny) + 1];
  });
  double acc = 0.0;
  for (double v : term) acc += v;
  return psi[k] + psi[n] - acc / static_cast<double>(n);
}

PointCloud columns(const PointCloud& cloud, std::size_t begin, std::size_t end) {
  PointCloud out;
  out.dim = end - begin;
  const std::size_t n = cloud.size();
  out.data.resize(n * out.dim);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(cloud.data.begin() + static_cast<std::ptrdiff_t>(i * cloud.dim + begin),
              cloud.data.begin() + static_cast<std::ptrdiff_t>(i * cloud.dim + end),
              out.data.begin() + static_cast<std::ptrdiff_t>(i * out.dim));
  }
  return out;
}

// Delete-half jackknife: the spread of estimates on random halves of the
// data approximates the standard error of the full-sample estimate.
template <class Fn>
double half_sample_se(std::size_t n, std::size_t k, const KnnOptions& opts, Fn&& estimate) {
  const std::size_t half = n / 2;
  if (opts.resamples < 2 || half <= 10 * k) return 0.0;
  std::vector<double> est(opts.resamples);
  std::vector<std::size_t> idx(n);
  for (std::size_t r = 0; r < opts.resamples; ++r) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 engine(mix(opts.seed ^ mix(r + 0x1000)));
    for (std::size_t i = 0; i < half; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(idx[i], idx[pick(engine)]);
    }
    std::vector<std::size_t> rows(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(half));
    std::sort(rows.begin(), rows.end());
    est[r] = estimate(rows);
  }
  const double mean = std::accumulate(est.begin(), est.end(), 0.0) / static_cast<double>(est.size());
  double ss = 0.0;
  for (double v : est) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(est.size() - 1));
}

double saturation_cap(std::size_t n) { return 0.5 * std::log2(static_cast<double>(n)); }

struct Prepared {
  PointCloud cloud;
  bool jittered = false;
};

Prepared prepare(const PointCloud& cloud, std::uint64_t seed) {
  Prepared p{cloud, false};
  p.jittered = jitter_duplicates(p.cloud, seed);
  return p;
}

// h(joint) - h(joint[:, split:]) in bits, with duplicates already broken.
double cond_bits(const PointCloud& joint, std::size_t split, std::size_t k, unsigned workers) {
  const double h_joint = kl_nats(joint, k, workers);
  if (split == joint.dim) return h_joint / kLn2;
  const double h_y = kl_nats(columns(joint, split, joint.dim), k, workers);
  return (h_joint - h_y) / kLn2;
}

}  // namespace

std::string to_string(Quantity q) {
  switch (q) {
    case Quantity::Entropy: return "entropy";
    case Quantity::ConditionalEntropy: return "conditional_entropy";
    case Quantity::EntropyRate: return "entropy_rate";
    case Quantity::MutualInfo: return "mutual_info";
    case Quantity::NegentropyRate: return "negentropy_rate";
  }
  return "unknown";
}

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::Knn: return "knn";
    case Estimator::GaussianClosedForm: return "gaussian_closed_form";
    case Estimator::Spectral: return "spectral";
  }
  return "unknown";
}

bool InfoEstimate::has_flag(std::string_view f) const {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

void InfoEstimate::add_flag(std::string_view f) {
  if (!has_flag(f)) flags.emplace_back(f);
}

PointCloud PointCloud::from_scalar(std::vector<double> values) {
  PointCloud c;
  c.dim = 1;
  c.data = std::move(values);
  return c;
}

PointCloud PointCloud::join(const PointCloud& a, const PointCloud& b) {
  if (a.size() != b.size()) throw std::invalid_argument("point clouds differ in sample count");
  PointCloud out;
  out.dim = a.dim + b.dim;
  const std::size_t n = a.size();
  out.data.resize(n * out.dim);
  for (std::size_t i = 0; i < n; ++i) {
    double* dst = out.data.data() + i * out.dim;
    std::copy_n(a.data.data() + i * a.dim, a.dim, dst);
    std::copy_n(b.data.data() + i * b.dim, b.dim, dst + a.dim);
  }
  return out;
}

PointCloud PointCloud::subset(const std::vector<std::size_t>& rows) const {
  PointCloud out;
  out.dim = dim;
  out.data.resize(rows.size() * dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy_n(data.data() + rows[r] * dim, dim, out.data.data() + r * dim);
  }
  return out;
}

InfoEstimate knn_entropy(const PointCloud& points, const KnnOptions& opts) {
  check_dim(points.dim);
  const std::size_t n = points.size();
  check_sample_size(n, opts.k);
  const Prepared p = prepare(points, opts.seed);

  InfoEstimate est;
  est.quantity = Quantity::Entropy;
  est.estimator = Estimator::Knn;
  est.k = opts.k;
  est.n_samples = n;
  est.dim = points.dim;
  est.value = kl_nats(p.cloud, opts.k, opts.workers) / kLn2;
  est.std_error = half_sample_se(n, opts.k, opts, [&](const std::vector<std::size_t>& rows) {
    return kl_nats(p.cloud.subset(rows), opts.k, opts.workers) / kLn2;
  });
  if (p.jittered) est.add_flag(flag::kJittered);
  return est;
}

InfoEstimate ksg_mutual_info(const PointCloud& x, const PointCloud& y, const KnnOptions& opts) {
  if (x.size() != y.size()) throw std::invalid_argument("ksg_mutual_info: sample counts differ");
  check_dim(x.dim + y.dim);
  const std::size_t n = x.size();
  check_sample_size(n, opts.k);
  // joint jitter keeps x and y perturbed consistently
  Prepared j = prepare(PointCloud::join(x, y), opts.seed);
  const PointCloud px = columns(j.cloud, 0, x.dim);
  const PointCloud py = columns(j.cloud, x.dim, j.cloud.dim);

  InfoEstimate est;
  est.quantity = Quantity::MutualInfo;
  est.estimator = Estimator::Knn;
  est.k = opts.k;
  est.n_samples = n;
  est.dim = x.dim;
  double bits = ksg_nats(px, py, opts.k, opts.workers) / kLn2;
  est.std_error = half_sample_se(n, opts.k, opts, [&](const std::vector<std::size_t>& rows) {
    return ksg_nats(px.subset(rows), py.subset(rows), opts.k, opts.workers) / kLn2;
  });
  if (j.jittered) est.add_flag(flag::kJittered);
  if (bits < 0.0) {
    bits = 0.0;
    est.add_flag(flag::kClamped);
  }
  const double cap = saturation_cap(n);
  if (bits > cap) {
    bits = cap;
    est.add_flag(flag::kSaturated);
  }
  est.value = bits;
  return est;
}

InfoEstimate conditional_entropy(const PointCloud& x, const PointCloud& y, const KnnOptions& opts) {
  if (x.size() != y.size()) throw std::invalid_argument("conditional_entropy: sample counts differ");
  check_dim(x.dim + y.dim);
  const std::size_t n = x.size();
  check_sample_size(n, opts.k);
  const Prepared j = prepare(PointCloud::join(x, y), opts.seed);

  InfoEstimate est;
  est.quantity = Quantity::ConditionalEntropy;
  est.estimator = Estimator::Knn;
  est.k = opts.k;
  est.n_samples = n;
  est.dim = x.dim;
  est.value = cond_bits(j.cloud, x.dim, opts.k, opts.workers);
  est.std_error = half_sample_se(n, opts.k, opts, [&](const std::vector<std::size_t>& rows) {
    return cond_bits(j.cloud.subset(rows), x.dim, opts.k, opts.workers);
  });
  if (j.jittered) est.add_flag(flag::kJittered);
  const double h_x = kl_nats(columns(j.cloud, 0, x.dim), opts.k, opts.workers) / kLn2;
  if (h_x - est.value > saturation_cap(n)) est.add_flag(flag::kSaturated);
  return est;
}

PointCloud lagged_cloud(const SampleSet& samples, const std::vector<long>& lags, std::size_t t_begin,
                        std::size_t t_end, std::size_t max_points) {
  if (lags.empty()) throw std::invalid_argument("lagged_cloud: no lags");
  if (t_end <= t_begin || t_end > samples.length()) throw std::invalid_argument("lagged_cloud: bad index range");
  for (long l : lags) {
    const long lo = static_cast<long>(t_begin) + l;
    const long hi = static_cast<long>(t_end) - 1 + l;
    if (lo < 0 || hi >= static_cast<long>(samples.length())) {
      throw std::invalid_argument("lagged_cloud: lag reaches outside the path");
    }
  }
  const std::size_t d = samples.dim();
  const std::size_t per_path = t_end - t_begin;
  const std::size_t total = per_path * samples.paths();
  const std::size_t stride = max_points == 0 ? 1 : std::max<std::size_t>(1, (total + max_points - 1) / max_points);
  PointCloud out;
  out.dim = d * lags.size();
  out.data.reserve((total / stride + 1) * out.dim);
  for (std::size_t g = 0; g < total; g += stride) {
    const std::size_t p = g / per_path;
    const std::size_t t = t_begin + g % per_path;
    for (long l : lags) {
      const auto s = static_cast<std::size_t>(static_cast<long>(t) + l);
      for (std::size_t c = 0; c < d; ++c) out.data.push_back(samples.at(p, s, c));
    }
  }
  return out;
}

double gaussian_entropy_bits(const Matrix& cov) {
  const auto n = static_cast<double>(cov.rows());
  const double det = cov.determinant();
  if (!(det > 0.0)) return -std::numeric_limits<double>::infinity();
  return 0.5 * (n * std::log2(kTwoPiE) + std::log2(det));
}

double entropy_power(double h_bits, std::size_t n) {
  if (n == 0) throw std::invalid_argument("entropy_power: zero dimension");
  return std::exp2(2.0 * h_bits / static_cast<double>(n)) / kTwoPiE;
}

InfoEstimate gaussian_entropy_rate(const SpectrumGrid& spec) {
  const LogIntegral li = logdet_spectrum_integral(spec);
  if (li.floored) throw SingularSpectrumError("spectrum reaches the floor; entropy rate is -inf");
  InfoEstimate est;
  est.quantity = Quantity::EntropyRate;
  est.estimator = Estimator::Spectral;
  est.n_samples = spec.size();
  est.dim = spec.dim;
  est.value = 0.5 * static_cast<double>(spec.dim) * std::log2(kTwoPiE) + 0.5 * li.bits;
  return est;
}

namespace {

// Delay-embedded cloud (x_t, x_{t-1}, ..., x_{t-p}) over the whole usable
// range of every path.
PointCloud embed(const SampleSet& samples, std::size_t depth, std::size_t max_points) {
  std::vector<long> lags(depth + 1);
  for (std::size_t i = 0; i <= depth; ++i) lags[i] = -static_cast<long>(i);
  if (samples.length() <= depth) throw std::invalid_argument("series shorter than embedding depth");
  return lagged_cloud(samples, lags, depth, samples.length(), max_points);
}

double rate_at(const SampleSet& samples, std::size_t depth, const KnnOptions& opts,
               std::size_t max_points, bool& jittered) {
  Prepared p = prepare(embed(samples, depth, max_points), opts.seed + depth);
  check_sample_size(p.cloud.size(), opts.k);
  jittered = jittered || p.jittered;
  return cond_bits(p.cloud, samples.dim(), opts.k, opts.workers);
}

InfoEstimate rate_estimate(const SampleSet& samples, std::size_t depth, double value,
                           const KnnOptions& opts, std::size_t max_points) {
  InfoEstimate est;
  est.quantity = Quantity::EntropyRate;
  est.estimator = Estimator::Knn;
  est.k = opts.k;
  est.embedding_depth = depth;
  est.dim = samples.dim();
  est.value = value;
  Prepared p = prepare(embed(samples, depth, max_points), opts.seed + depth);
  est.n_samples = p.cloud.size();
  est.std_error = half_sample_se(p.cloud.size(), opts.k, opts, [&](const std::vector<std::size_t>& rows) {
    return cond_bits(p.cloud.subset(rows), samples.dim(), opts.k, opts.workers);
  });
  return est;
}

std::size_t depth_limit(std::size_t dim) { return kMaxEntropyDim / dim - 1; }

}  // namespace

InfoEstimate empirical_entropy_rate(const SampleSet& samples, std::size_t depth, const KnnOptions& opts,
                                    std::size_t max_points) {
  const std::size_t n = samples.dim();
  check_dim(n * (depth + 1));
  bool jittered = false;
  const double h = rate_at(samples, depth, opts, max_points, jittered);
  InfoEstimate est = rate_estimate(samples, depth, h, opts, max_points);
  if (n * (depth + 2) <= kMaxEntropyDim) {
    const double next = rate_at(samples, depth + 1, opts, max_points, jittered);
    if (std::fabs(h - next) >= kRateConvergenceBits) est.add_flag(flag::kNotConverged);
  } else {
    est.add_flag(flag::kConvergenceUnchecked);
  }
  if (jittered) est.add_flag(flag::kJittered);
  return est;
}

InfoEstimate adaptive_entropy_rate(const SampleSet& samples, std::size_t max_depth, const KnnOptions& opts,
                                   std::size_t max_points) {
  const std::size_t n = samples.dim();
  check_dim(n);
  const std::size_t limit = depth_limit(n);
  const std::size_t top = std::min(max_depth, limit);
  bool jittered = false;
  double h = rate_at(samples, 0, opts, max_points, jittered);
  std::size_t depth = 0;
  bool converged = false;
  while (depth < top) {
    const double next = rate_at(samples, depth + 1, opts, max_points, jittered);
    if (std::fabs(h - next) < kRateConvergenceBits) {
      converged = true;
      break;
    }
    h = next;
    ++depth;
  }
  InfoEstimate est = rate_estimate(samples, depth, h, opts, max_points);
  if (!converged) est.add_flag(flag::kNotConverged);
  if (max_depth > limit) est.add_flag(flag::kDepthClamped);
  if (jittered) est.add_flag(flag::kJittered);
  return est;
}

InfoEstimate negentropy_rate(const SpectrumGrid& spec, const InfoEstimate& rate) {
  if (rate.dim != spec.dim) throw std::invalid_argument("negentropy_rate: dimension mismatch");
  const InfoEstimate g = gaussian_entropy_rate(spec);
  InfoEstimate est;
  est.quantity = Quantity::NegentropyRate;
  est.estimator = rate.estimator;
  est.k = rate.k;
  est.n_samples = rate.n_samples;
  est.embedding_depth = rate.embedding_depth;
  est.dim = spec.dim;
  est.std_error = rate.std_error;
  est.flags = rate.flags;
  est.value = g.value - rate.value;
  if (est.value < 0.0) {
    est.value = 0.0;
    est.add_flag(flag::kClamped);
  }
  return est;
}

InfoEstimate negentropy_rate(const SpectrumGrid& spec, const SampleSet& samples, std::size_t depth,
                             const KnnOptions& opts, std::size_t max_points) {
  return negentropy_rate(spec, adaptive_entropy_rate(samples, depth, opts, max_points));
}

InfoEstimate gaussian_mstep_mi(const ProcessModel& model, std::size_t m) {
  if (m == 0) throw HorizonError("prediction horizon must be at least 1");
  InfoEstimate est;
  est.quantity = Quantity::MutualInfo;
  est.estimator = Estimator::GaussianClosedForm;
  est.embedding_depth = m - 1;
  est.dim = model.dim;
  if (m == 1) return est;
  const double d1 = mstep_error_covariance(model, 1).determinant();
  const double dm = mstep_error_covariance(model, m).determinant();
  est.value = 0.5 * std::log2(dm / d1);
  if (est.value < 0.0) {
    est.value = 0.0;
    est.add_flag(flag::kClamped);
  }
  return est;
}

InfoEstimate empirical_mstep_mi(const SampleSet& samples, std::size_t m, std::size_t depth,
                                const KnnOptions& opts, std::size_t max_points) {
  if (m == 0) throw HorizonError("prediction horizon must be at least 1");
  if (depth == 0) throw std::invalid_argument("empirical_mstep_mi: depth must be positive");
  const std::size_t n = samples.dim();
  InfoEstimate est;
  est.quantity = Quantity::MutualInfo;
  est.estimator = Estimator::Knn;
  est.k = opts.k;
  est.embedding_depth = depth;
  est.dim = n;
  if (m == 1) return est;
  check_dim(n * (m + depth));
  // columns: x_t | x_{t-1..t-m+1} (near) | x_{t-m..t-m-depth+1} (far)
  std::vector<long> lags;
  for (std::size_t i = 0; i < m + depth; ++i) lags.push_back(-static_cast<long>(i));
  const std::size_t span = m + depth - 1;
  if (samples.length() <= span) throw HorizonError("series too short for horizon and depth");
  Prepared p = prepare(lagged_cloud(samples, lags, span, samples.length(), max_points), opts.seed);
  const std::size_t rows = p.cloud.size();
  check_sample_size(rows, opts.k);
  est.n_samples = rows;

  auto estimate = [&](const PointCloud& c) {
    const std::size_t near_end = n * m;
    const PointCloud far = columns(c, near_end, c.dim);
    PointCloud x_far = PointCloud::join(columns(c, 0, n), far);
    const double h_given_far = cond_bits(x_far, n, opts.k, opts.workers);
    const double h_given_all = cond_bits(c, n, opts.k, opts.workers);
    return h_given_far - h_given_all;
  };
  double bits = estimate(p.cloud);
  est.std_error = half_sample_se(rows, opts.k, opts, [&](const std::vector<std::size_t>& r) {
    return estimate(p.cloud.subset(r));
  });
  if (p.jittered) est.add_flag(flag::kJittered);
  if (bits < 0.0) {
    bits = 0.0;
    est.add_flag(flag::kClamped);
  }
  est.value = bits;
  return est;
}

}  // namespace varbound
