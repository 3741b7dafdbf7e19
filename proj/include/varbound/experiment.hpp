#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "varbound/bounds.hpp"
#include "varbound/diagnostics.hpp"
#include "varbound/predict.hpp"
#include "varbound/procgen.hpp"

namespace varbound {

struct PredictorChoice {
  PredictorKind kind = PredictorKind::Levinson;
  std::optional<std::size_t> order;  // empty: chosen from the model

  std::string label() const;
};

struct SamplePlan {
  std::size_t paths = 20;
  std::size_t length = 5000;
  std::optional<std::size_t> burn_in;
  std::uint64_t seed = 0;
};

struct EstimatorParams {
  std::size_t k = 4;
  std::size_t depth = 16;  // entropy-rate embedding ceiling
  std::size_t n_freq = 4096;
  double alpha = kDefaultAlpha;
  double tail_fraction = kDefaultTailFraction;
  std::size_t resamples = 20;
  std::size_t max_points = kDefaultRateMaxPoints;
  std::size_t diag_depth = kDefaultEmbedDepth;
  std::size_t diag_points = kDefaultDiagnosticPoints;
  std::size_t diag_resamples = 20;
  bool cross_check = true;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::vector<std::pair<std::string, ProcessModel>> models;
  std::vector<std::pair<std::string, RecursiveSpec>> recursive;
  std::vector<PredictorChoice> predictors;
  std::vector<std::size_t> horizons{1};
  SamplePlan samples;
  EstimatorParams estimator;
  std::vector<BoundKind> bounds;  // empty: every applicable kind
  bool oracle_fit = true;         // fit on theoretical rather than estimated autocovariances
  std::optional<LearningDemo> learning;
  unsigned workers = 0;
  bool run_diagnostics = true;  // whitening checks per predictor run
  bool run_bounds = true;       // bound rows; off leaves only predictor runs

  bool wants(BoundKind kind) const;
};

struct ResultRow {
  std::string model;
  std::string predictor;
  std::size_t horizon = 1;
  BoundReport report;
  std::optional<double> paper_literal;  // additive m-step composition
};

struct PredictorRun {
  std::string model;
  std::size_t horizon = 1;
  PredictorReport report;
  WhiteningVerdict whitening;
};

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<PredictorRun> runs;
  std::vector<Check> checks;
  std::vector<std::string> violations;  // BoundViolationError messages
};

// The default predictor list: levinson, truncated(1), zero, model_mstep.
std::vector<PredictorChoice> default_predictors();

// Order used when a Levinson choice leaves it open: p + 10 q, at least 1.
std::size_t auto_order(const ProcessModel& model);

// Empty when the choice does not apply: Levinson and truncated fits are
// one-step only, and the model predictor needs an invertible model.
std::optional<Predictor> make_predictor(const PredictorChoice& choice, const ProcessModel& model,
                                        const AutocovSequence& fit, std::size_t m);

// Runs every (model, predictor, horizon, bound kind) cell. Bound
// violations are collected rather than thrown.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace varbound
