#include "varbound/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "varbound/errors.hpp"
#include "varbound/infotheory.hpp"
#include "varbound/spectral.hpp"

namespace varbound {
namespace {

InfoEstimate zero_negentropy(std::size_t dim) {
  InfoEstimate j;
  j.quantity = Quantity::NegentropyRate;
  j.estimator = Estimator::GaussianClosedForm;
  j.dim = dim;
  return j;
}

InfoEstimate closed_form_entropy(const Matrix& cov, Quantity q) {
  InfoEstimate h;
  h.quantity = q;
  h.estimator = Estimator::GaussianClosedForm;
  h.dim = static_cast<std::size_t>(cov.rows());
  h.value = gaussian_entropy_bits(cov);
  return h;
}

class Runner {
 public:
  explicit Runner(const ExperimentConfig& c) : cfg_(c) {
    knn_.k = c.estimator.k;
    knn_.resamples = c.estimator.resamples;
    knn_.seed = c.samples.seed;
    knn_.workers = c.workers;
    mi_.depth = c.estimator.diag_depth;
    mi_.max_points = c.estimator.diag_points;
    mi_.knn = knn_;
    mi_.knn.resamples = c.estimator.diag_resamples;
  }

  ExperimentResult run() {
    for (const auto& [name, model] : cfg_.models) run_model(name, model);
    for (const auto& [name, spec] : cfg_.recursive) run_recursive(name, spec);
    if (cfg_.learning) run_learning(*cfg_.learning);
    return std::move(out_);
  }

 private:
  void add_row(const std::string& model, const std::string& predictor, std::size_t m, const Bound& bound,
               double achieved, double achieved_se, const std::vector<DiagnosticVerdict>& diags,
               std::optional<double> literal = std::nullopt) {
    ResultRow row;
    row.model = model;
    row.predictor = predictor;
    row.horizon = m;
    row.paper_literal = literal;
    try {
      row.report = gap_report(bound, achieved, achieved_se, diags, predictor);
    } catch (const BoundViolationError& e) {
      out_.violations.push_back(model + " / " + predictor + " / m=" + std::to_string(m) + ": " + e.what());
      BoundReport r;
      r.bound = bound;
      r.bound.add_flag("violation");
      r.predictor = predictor;
      r.achieved = achieved;
      r.achieved_std_error = achieved_se;
      r.gap_ratio = achieved / bound.value;
      r.diagnostics = diags;
      r.verdict = Verdict::Strict;
      row.report = std::move(r);
    }
    out_.rows.push_back(std::move(row));
  }

  void check(std::string name, bool pass, std::string detail = {}) {
    out_.checks.push_back({std::move(name), pass, std::move(detail)});
  }

  // h(x_k | x_{k-p..k-1}): closed form for Gaussian models, k-NN otherwise.
  std::optional<InfoEstimate> past_entropy(const ProcessModel& model, const SampleSet& samples, std::size_t p) {
    if (model.innovation.gaussian()) {
      const auto mc = multichannel_levinson(theoretical_autocov(model, p), p);
      return closed_form_entropy(mc.innovation_cov, Quantity::ConditionalEntropy);
    }
    if (model.dim * (p + 1) > kMaxEntropyDim) return std::nullopt;
    InfoEstimate h = empirical_entropy_rate(samples, p, knn_, cfg_.estimator.max_points);
    h.quantity = Quantity::ConditionalEntropy;
    return h;
  }

  struct ModelBounds {
    Bound one;
    Bound ng;
    Bound cap;
    std::map<std::size_t, Bound> mstep;
    std::map<std::size_t, double> literal;
  };

  ModelBounds model_bounds(const std::string& name, const ProcessModel& model, const SampleSet& samples,
                           const std::vector<std::size_t>& horizons) {
    const auto& est = cfg_.estimator;
    const std::size_t n = model.dim;
    const bool gaussian = model.innovation.gaussian();
    const SpectrumGrid spec = theoretical_spectrum(model, est.n_freq);
    ModelBounds b;
    b.one = one_step_bound(spec);

    InfoEstimate j = zero_negentropy(n);
    if (!gaussian) j = negentropy_rate(spec, samples, est.depth, knn_, est.max_points);
    b.ng = nongaussian_bound(spec, j);
    if (gaussian && est.cross_check && cfg_.wants(BoundKind::NonGaussian)) {
      KnnOptions light = knn_;
      light.resamples = 0;
      cross_check(b.ng, "negentropy_rate", j, negentropy_rate(spec, samples, est.depth, light, est.max_points));
    }
    if (gaussian) check(name + ": nongaussian(J=0) == " + to_string(b.one.kind), b.ng.value == b.one.value);

    InfoEstimate h_marg = closed_form_entropy(theoretical_autocov(model, 0).values[0], Quantity::Entropy);
    if (!gaussian) h_marg = knn_entropy(lagged_cloud(samples, {0}, 0, samples.length(), est.max_points), knn_);
    b.cap = entropy_power_cap(h_marg, n);

    // non-Gaussian models compose on the negentropy-corrected one-step
    // bound; for Gaussian ones that bound is the one-step bound itself
    for (std::size_t m : horizons) {
      const InfoEstimate mi = gaussian_mstep_mi(model, m);
      b.mstep.emplace(m, mstep_bound(b.ng, m, mi));
      b.literal.emplace(m, mstep_bound_additive(b.ng, mi));
    }
    if (b.mstep.count(1) != 0) check(name + ": mstep(m=1) == nongaussian", b.mstep.at(1).value == b.ng.value);
    double prev = 0.0;
    bool monotone = true;
    bool capped = true;
    for (const auto& [m, mb] : b.mstep) {
      monotone = monotone && mb.value >= prev;
      prev = mb.value;
      const double tol = 3.0 * std::hypot(mb.std_error, b.cap.std_error) + 1e-9 * b.cap.value;
      capped = capped && mb.value <= b.cap.value + tol;
    }
    check(name + ": mstep bound nondecreasing in m", monotone);
    check(name + ": mstep bound <= entropy power cap", capped,
          "cap " + std::to_string(b.cap.value) + ", largest " + std::to_string(prev));
    return b;
  }

  void run_model(const std::string& name, const ProcessModel& model) {
    model.validate();
    require_stable(model);
    const auto& est = cfg_.estimator;
    const std::size_t n = model.dim;
    const SampleSet samples = simulate(model, cfg_.samples.length, cfg_.samples.paths, cfg_.samples.seed,
                                       cfg_.samples.burn_in, cfg_.workers);
    std::size_t max_order = 1;
    for (const auto& c : cfg_.predictors) max_order = std::max(max_order, c.order.value_or(auto_order(model)));
    const AutocovSequence fit = cfg_.oracle_fit ? theoretical_autocov(model, max_order)
                                                : estimate_autocov(samples, max_order, cfg_.workers);
    std::vector<std::size_t> horizons = cfg_.horizons;
    std::sort(horizons.begin(), horizons.end());
    horizons.erase(std::unique(horizons.begin(), horizons.end()), horizons.end());

    std::optional<ModelBounds> mb;
    if (cfg_.run_bounds) mb = model_bounds(name, model, samples, horizons);

    std::map<std::size_t, std::optional<InfoEstimate>> past_cache;
    bool cap_row_done = false;
    for (std::size_t m : horizons) {
      for (const auto& choice : cfg_.predictors) {
        const auto pred = make_predictor(choice, model, fit, m);
        if (!pred) continue;
        PredictorRun pr;
        pr.model = name;
        pr.horizon = m;
        pr.report = run_predictor(*pred, samples, est.tail_fraction, cfg_.workers);
        if (cfg_.run_diagnostics) pr.whitening = gaussian_whitening_check(pr.report, samples, est.alpha, mi_);
        if (mb) {
          const auto& rep = pr.report;
          const auto& diags = pr.whitening.parts;
          const double ach = rep.det_error_cov;
          const double se = rep.det_std_error;
          if (m == 1) {
            if (cfg_.wants(mb->one.kind)) add_row(name, rep.predictor, m, mb->one, ach, se, diags);
            if (cfg_.wants(BoundKind::NonGaussian)) add_row(name, rep.predictor, m, mb->ng, ach, se, diags);
            const bool linear_past = pred->kind == PredictorKind::Levinson ||
                                     pred->kind == PredictorKind::MultichannelLevinson ||
                                     pred->kind == PredictorKind::Truncated;
            if (linear_past && cfg_.wants(BoundKind::Prediction1Step)) {
              auto it = past_cache.find(pred->order);
              if (it == past_cache.end()) {
                it = past_cache.emplace(pred->order, past_entropy(model, samples, pred->order)).first;
              }
              if (it->second) {
                Bound b = estimation_bound(*it->second, n);
                b.kind = BoundKind::Prediction1Step;
                add_row(name, rep.predictor, m, b, ach, se, diags);
              }
            }
          }
          if (cfg_.wants(BoundKind::PredictionMstep)) {
            add_row(name, rep.predictor, m, mb->mstep.at(m), ach, se, diags, mb->literal.at(m));
          }
          if (pred->kind == PredictorKind::Zero && !cap_row_done && cfg_.wants(BoundKind::EntropyPowerCap)) {
            add_row(name, rep.predictor, m, mb->cap, ach, se, diags);
            cap_row_done = true;
          }
        }
        pr.report.innovations = SampleSet();
        out_.runs.push_back(std::move(pr));
      }
    }
  }

  void run_recursive(const std::string& name, const RecursiveSpec& spec) {
    spec.validate();
    const auto& est = cfg_.estimator;
    const std::size_t n = spec.dim();
    const RecursiveRun run = simulate_recursive(spec, cfg_.samples.length, cfg_.samples.paths,
                                                cfg_.samples.seed, cfg_.workers);
    PredictorRun pr;
    pr.model = name;
    pr.report = run_predictor(zero_predictor(n, 1), run.g_values, est.tail_fraction, cfg_.workers);
    pr.report.predictor = "g_stream(" + to_string(spec.g_form) + ")";
    if (cfg_.run_diagnostics) pr.whitening = gaussian_whitening_check(pr.report, run.g_values, est.alpha, mi_);

    if (cfg_.run_bounds && cfg_.wants(BoundKind::Recursive)) {
      // white noise: conditioning on its own past changes nothing
      InfoEstimate h = closed_form_entropy(spec.noise.cov, Quantity::EntropyRate);
      if (!spec.noise.gaussian()) {
        h = knn_entropy(lagged_cloud(run.noise, {0}, 0, run.noise.length(), est.max_points), knn_);
        h.quantity = Quantity::EntropyRate;
      }
      add_row(name, pr.report.predictor, 1, recursive_bound(h, n), pr.report.det_error_cov,
              pr.report.det_std_error, pr.whitening.parts);
    }
    pr.report.innovations = SampleSet();
    out_.runs.push_back(std::move(pr));
  }

  void run_learning(const LearningDemo& demo) {
    if (!cfg_.run_bounds || !cfg_.wants(BoundKind::Learning)) return;
    const LearningDemoResult r = run_learning_demo(demo);
    add_row("learning_demo", "ridge(" + std::to_string(demo.ridge_lambda) + ")", 1, r.bound, r.achieved,
            r.achieved_std_error, {});
  }

  const ExperimentConfig& cfg_;
  KnnOptions knn_;
  MiTestOptions mi_;
  ExperimentResult out_;
};

}  // namespace

std::size_t auto_order(const ProcessModel& model) {
  return std::max<std::size_t>(1, model.p() + 10 * model.q());
}

std::optional<Predictor> make_predictor(const PredictorChoice& choice, const ProcessModel& model,
                                        const AutocovSequence& fit, std::size_t m) {
  switch (choice.kind) {
    case PredictorKind::Levinson:
    case PredictorKind::MultichannelLevinson:
      if (m != 1) return std::nullopt;
      return fit_levinson(fit, choice.order.value_or(auto_order(model)));
    case PredictorKind::Truncated:
      if (m != 1) return std::nullopt;
      return fit_truncated(fit, choice.order.value_or(1));
    case PredictorKind::Zero:
      return zero_predictor(model.dim, m);
    case PredictorKind::ModelMstep:
      if (!is_invertible(model)) return std::nullopt;
      return model_predictor(model, m);
  }
  return std::nullopt;
}

std::string PredictorChoice::label() const {
  std::string s = to_string(kind);
  if (order) s += ":" + std::to_string(*order);
  return s;
}

bool ExperimentConfig::wants(BoundKind kind) const {
  return bounds.empty() || std::find(bounds.begin(), bounds.end(), kind) != bounds.end();
}

std::vector<PredictorChoice> default_predictors() {
  return {{PredictorKind::Levinson, std::nullopt},
          {PredictorKind::Truncated, 1},
          {PredictorKind::Zero, std::nullopt},
          {PredictorKind::ModelMstep, std::nullopt}};
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (config.samples.paths == 0 || config.samples.length == 0) {
    throw ConfigError("samples.paths and samples.length must be positive");
  }
  if (config.horizons.empty()) throw ConfigError("horizons must not be empty");
  for (std::size_t m : config.horizons) {
    if (m == 0) throw ConfigError("horizons must be >= 1");
  }
  return Runner(config).run();
}

}  // namespace varbound
