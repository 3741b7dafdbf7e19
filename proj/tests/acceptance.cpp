// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [criterion ids...]

#include <Eigen/Cholesky>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "varbound/bounds.hpp"
#include "varbound/catalog.hpp"
#include "varbound/diagnostics.hpp"
#include "varbound/experiment.hpp"
#include "varbound/infotheory.hpp"
#include "varbound/io.hpp"
#include "varbound/predict.hpp"
#include "varbound/procgen.hpp"

using namespace varbound;
using std::numbers::e;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

bool within_rel(double got, double want, double tol) { return std::fabs(got - want) <= tol * std::fabs(want); }

const double kHalfLog2PiE = 0.5 * std::log2(2 * pi * e);

// 1. Kolmogorov-Szego equals the innovation variance on every scalar catalog model.
Outcome szego() {
  Outcome o;
  double worst = 0.0;
  std::size_t count = 0;
  for (const auto& entry : model_catalog()) {
    if (entry.model.dim != 1) continue;
    const double sigma2 = entry.model.innovation.cov(0, 0);
    const double ks = ks_bound(theoretical_spectrum(entry.model, 4096)).value;
    worst = std::max(worst, std::fabs(ks - sigma2) / sigma2);
    o.require(within_rel(ks, sigma2, 1e-5), entry.name);
    ++count;
  }
  o.require(count >= 10, "at least 10 scalar models");
  o.note(std::to_string(count) + " models, max rel err " + fmt("%.2e", worst));
  return o;
}

// 2. Wiener-Masani and multichannel Levinson on the VAR(1) catalog entries.
Outcome wiener_masani() {
  Outcome o;
  double worst_wm = 0.0, worst_lev = 0.0;
  for (const char* name : {"var1", "var1_diag", "var1_laplace"}) {
    const auto& m = catalog_model(name);
    const double det_sigma = m.innovation.cov.determinant();
    const double wm = wm_bound(theoretical_spectrum(m, 4096)).value;
    const double lev = multichannel_levinson(theoretical_autocov(m, 10), 10).det_sequence.back();
    worst_wm = std::max(worst_wm, std::fabs(wm - det_sigma) / det_sigma);
    worst_lev = std::max(worst_lev, std::fabs(lev - det_sigma));
    o.require(within_rel(wm, det_sigma, 1e-4), std::string(name) + " wm");
    o.require(std::fabs(lev - det_sigma) <= 1e-6, std::string(name) + " levinson");
  }
  o.note("wm max rel err " + fmt("%.2e", worst_wm) + ", levinson max abs err " + fmt("%.2e", worst_lev));
  return o;
}

struct Ar1Run {
  SampleSet samples;
  SpectrumGrid spec;
};

const Ar1Run& ar1_half() {
  static const Ar1Run run = [] {
    const auto& m = catalog_model("ar1_0.5");
    return Ar1Run{simulate(m, 10000, 200, 20240501), theoretical_spectrum(m, 4096)};
  }();
  return run;
}

// 3. Levinson(1) achieves the KS bound on Gaussian AR(1) and whitens it.
Outcome achievability() {
  Outcome o;
  const auto& run = ar1_half();
  const auto& m = catalog_model("ar1_0.5");
  const auto rep = run_predictor(fit_levinson(theoretical_autocov(m, 1), 1), run.samples);
  const auto white = gaussian_whitening_check(rep, run.samples);
  const auto gap = gap_report(ks_bound(run.spec), rep, white.parts);
  o.require(gap.gap_ratio >= 0.97 && gap.gap_ratio <= 1.03, "gap_ratio in [0.97, 1.03]");
  o.require(white.pass, "whitening check");
  o.note("gap_ratio " + fmt("%.4f", gap.gap_ratio) + ", verdict " + to_string(gap.verdict));
  for (const auto& p : white.parts) {
    o.note(p.label() + (p.pass ? " pass" : " fail") +
           (p.p_value ? " p=" + fmt("%.3f", *p.p_value) : " mi=" + fmt("%.4f", p.statistic)));
  }
  return o;
}

// 4. The zero predictor on the same process is strict and fails independence.
Outcome strictness() {
  Outcome o;
  const auto& run = ar1_half();
  const auto rep = run_predictor(zero_predictor(1), run.samples);
  const auto mi = innovation_independence(rep.innovations.tail(0.5), run.samples.tail(0.5));
  const auto gap = gap_report(ks_bound(run.spec), rep, std::span<const DiagnosticVerdict>(&mi, 1));
  o.require(std::fabs(gap.gap_ratio - 4.0 / 3.0) <= 0.03, "gap_ratio 4/3 +- 0.03");
  o.require(!mi.pass, "independence test fails");
  o.require(std::fabs(mi.statistic - 0.2075) <= 0.03, "MI 0.2075 +- 0.03");
  o.note("gap_ratio " + fmt("%.4f", gap.gap_ratio) + ", MI " + fmt("%.4f", mi.statistic) + " bits (SE " +
         fmt("%.4f", mi.std_error) + ")");
  return o;
}

// 5. Multiplicative m-step bound on AR(1) a=0.9.
Outcome mstep() {
  Outcome o;
  const auto& m = catalog_model("ar1_0.9");
  const auto s = simulate(m, 10000, 100, 20240502);
  const Matrix r0 = theoretical_autocov(m, 0).values[0];
  InfoEstimate h;
  h.value = gaussian_entropy_bits(r0);
  h.estimator = Estimator::GaussianClosedForm;
  const double cap = entropy_power_cap(h, 1).value;
  double prev = 0.0;
  for (std::size_t h_m : {1u, 2u, 3u, 5u}) {
    double oracle = 0.0;
    for (std::size_t i = 0; i < h_m; ++i) oracle += std::pow(0.81, static_cast<double>(i));
    const Bound b = mstep_bound(m, h_m);
    const auto rep = mstep_predict(m, s, h_m);
    const double gap = gap_report(b, rep, {}).gap_ratio;
    const std::string tag = "m=" + std::to_string(h_m);
    o.require(std::fabs(b.value - oracle) <= 1e-6, tag + " bound closed form");
    o.require(gap >= 0.97 && gap <= 1.05, tag + " gap in [0.97, 1.05]");
    o.require(b.value >= prev, tag + " monotone");
    o.require(b.value <= cap, tag + " below cap");
    prev = b.value;
    o.note(tag + " bound " + fmt("%.6f", b.value) + " gap " + fmt("%.4f", gap));
  }
  o.note("cap " + fmt("%.4f", cap));
  return o;
}

// 6. Negentropy-corrected bound for iid Laplace and uniform noise.
Outcome nongaussian() {
  Outcome o;
  struct Case {
    const char* name;
    double j;
    double bound;
  };
  for (const Case& c : {Case{"iid_laplace", 0.5 * std::log2(pi / e), e / pi},
                        Case{"iid_uniform", 0.5 * std::log2(pi * e / 6), 6 / (pi * e)}}) {
    const auto& m = catalog_model(c.name);
    const auto s = simulate(m, 10000, 10, 20240503);
    const auto spec = theoretical_spectrum(m, 4096);
    const auto j = negentropy_rate(spec, s, 16);
    const Bound ng = nongaussian_bound(spec, j);
    const auto rep = run_predictor(fit_levinson(theoretical_autocov(m, 1), 1), s);
    const auto white = gaussian_whitening_check(rep, s);
    const auto gap = gap_report(ng, rep, white.parts);
    const std::string tag = c.name;
    o.require(std::fabs(j.value - c.j) <= 0.05, tag + " negentropy");
    o.require(within_rel(ng.value, c.bound, 0.08), tag + " bound");
    o.require(gap.verdict == Verdict::Strict && gap.gap_ratio > 1.0 + gap.eps_mc, tag + " strictly above");
    o.note(tag + ": J " + fmt("%.4f", j.value) + " (want " + fmt("%.4f", c.j) + "), bound " + fmt("%.4f", ng.value) +
           ", achieved " + fmt("%.4f", rep.det_error_cov) + ", depth " + std::to_string(j.embedding_depth));
  }
  return o;
}

// 7. Recursive systems: f = 0 meets the bound, f = linear(-0.5) sits at 4/3.
Outcome recursive() {
  Outcome o;
  struct Case {
    const char* name;
    double gap;
  };
  for (const Case& c : {Case{"rec_zero", 1.0}, Case{"rec_linear", 4.0 / 3.0}}) {
    const auto& spec = catalog_recursive(c.name);
    const auto run = simulate_recursive(spec, 10000, 50, 20240504);
    InfoEstimate h;
    h.value = gaussian_entropy_bits(spec.noise.cov);
    h.quantity = Quantity::EntropyRate;
    h.estimator = Estimator::GaussianClosedForm;
    const Bound b = recursive_bound(h, spec.dim());
    const auto rep = run_predictor(zero_predictor(spec.dim()), run.g_values);
    const double gap = gap_report(b, rep, {}).gap_ratio;
    o.require(within_rel(gap, c.gap, 0.03), std::string(c.name) + " gap");
    o.note(std::string(c.name) + " bound " + fmt("%.4f", b.value) + " gap " + fmt("%.4f", gap));
  }
  return o;
}

// 8. Learning bound against the conjugate posterior predictive variance.
Outcome learning() {
  Outcome o;
  LearningDemo demo;
  demo.seed = 20240505;
  const auto r = run_learning_demo(demo);
  double sxx = 0.0;
  for (double x : r.x_train) sxx += x * x;
  const double post = 1.0 / (1.0 / demo.prior_var + sxx / demo.noise_var);
  const double oracle = r.x_test * r.x_test * post + demo.noise_var;
  o.require(std::fabs(r.bound.value - oracle) <= 1e-10 * oracle, "closed form");
  o.require(within_rel(r.achieved, oracle, 0.05), "ridge within 5%");
  o.note("bound " + fmt("%.6f", r.bound.value) + ", oracle " + fmt("%.6f", oracle) + ", ridge " +
         fmt("%.6f", r.achieved));
  return o;
}

struct EntropyCase {
  std::string name;
  std::size_t dim;
  double truth;
  std::function<void(std::mt19937_64&, double*)> draw;
};

std::vector<EntropyCase> entropy_battery() {
  std::vector<EntropyCase> cases;
  auto gauss = [](Matrix cov, std::string name) {
    const std::size_t d = static_cast<std::size_t>(cov.rows());
    const Matrix l = cov.llt().matrixL();
    const double truth = 0.5 * std::log2(std::pow(2 * pi * e, static_cast<double>(d)) * cov.determinant());
    return EntropyCase{std::move(name), d, truth, [l, d](std::mt19937_64& g, double* out) {
                         std::normal_distribution<double> nd;
                         Vector z(static_cast<Eigen::Index>(d));
                         for (auto& v : z) v = nd(g);
                         const Vector x = l * z;
                         for (std::size_t i = 0; i < d; ++i) out[i] = x(static_cast<Eigen::Index>(i));
                       }};
  };
  for (std::size_t d = 1; d <= 4; ++d) cases.push_back(gauss(Matrix::Identity(d, d), "gauss_iid_d" + std::to_string(d)));
  {
    Matrix c(2, 2);
    c << 1, 0.5, 0.5, 1;
    cases.push_back(gauss(c, "gauss_rho0.5_d2"));
    Matrix t(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) t(i, j) = std::pow(0.6, std::abs(i - j));
    cases.push_back(gauss(t, "gauss_toeplitz_d3"));
    cases.push_back(gauss(Matrix::Constant(1, 1, 4.0), "gauss_var4_d1"));
    Matrix a = Matrix::Zero(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = 9.0;
    cases.push_back(gauss(a, "gauss_diag19_d2"));
  }
  const double b = 1.0 / std::sqrt(2.0);
  for (std::size_t d = 1; d <= 4; ++d) {
    cases.push_back({"laplace_unitvar_d" + std::to_string(d), d, d * std::log2(2 * e * b), [d, b](std::mt19937_64& g, double* out) {
                       std::exponential_distribution<double> ex(1.0 / b);
                       std::bernoulli_distribution coin;
                       for (std::size_t i = 0; i < d; ++i) out[i] = coin(g) ? ex(g) : -ex(g);
                     }});
  }
  const double w = std::sqrt(12.0);
  for (std::size_t d = 1; d <= 4; ++d) {
    cases.push_back({"uniform_unitvar_d" + std::to_string(d), d, d * std::log2(w), [d, w](std::mt19937_64& g, double* out) {
                       std::uniform_real_distribution<double> u(-w / 2, w / 2);
                       for (std::size_t i = 0; i < d; ++i) out[i] = u(g);
                     }});
  }
  cases.push_back({"uniform01_d1", 1, 0.0, [](std::mt19937_64& g, double* out) {
                     out[0] = std::uniform_real_distribution<double>(0.0, 1.0)(g);
                   }});
  cases.push_back({"laplace_b1_d1", 1, std::log2(2 * e), [](std::mt19937_64& g, double* out) {
                     const double v = std::exponential_distribution<double>(1.0)(g);
                     out[0] = std::bernoulli_distribution()(g) ? v : -v;
                   }});
  cases.push_back({"exponential_d1", 1, std::log2(e), [](std::mt19937_64& g, double* out) {
                     out[0] = std::exponential_distribution<double>(1.0)(g);
                   }});
  cases.push_back({"uniform_box23_d2", 2, std::log2(6.0), [](std::mt19937_64& g, double* out) {
                     out[0] = std::uniform_real_distribution<double>(0.0, 2.0)(g);
                     out[1] = std::uniform_real_distribution<double>(0.0, 3.0)(g);
                   }});
  return cases;
}

// 9a. Kozachenko-Leonenko over the closed-form battery.
Outcome entropy_calibration() {
  Outcome o;
  const auto cases = entropy_battery();
  KnnOptions opts;
  opts.resamples = 0;
  double worst = 0.0;
  std::string worst_name;
  std::uint64_t seed = 9000;
  for (const auto& c : cases) {
    std::mt19937_64 g(seed++);
    PointCloud pc;
    pc.dim = c.dim;
    pc.data.resize(100000 * c.dim);
    for (std::size_t i = 0; i < 100000; ++i) c.draw(g, &pc.data[i * c.dim]);
    const double err = knn_entropy(pc, opts).value - c.truth;
    o.require(std::fabs(err) <= 0.05 * c.dim, c.name + " err " + fmt("%.4f", err));
    if (std::fabs(err) / c.dim > worst) {
      worst = std::fabs(err) / c.dim;
      worst_name = c.name;
    }
  }
  o.require(cases.size() == 20, "20 cases");
  o.note(std::to_string(cases.size()) + " cases, worst |err|/d " + fmt("%.4f", worst) + " (" + worst_name + ")");
  return o;
}

// 9b. KSG on correlated Gaussians.
Outcome mi_calibration() {
  Outcome o;
  std::mt19937_64 g(9100);
  std::normal_distribution<double> nd;
  std::vector<double> x(100000), y(100000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = nd(g);
    y[i] = 0.5 * x[i] + std::sqrt(0.75) * nd(g);
  }
  const auto mi = ksg_mutual_info(PointCloud::from_scalar(x), PointCloud::from_scalar(y));
  o.require(std::fabs(mi.value - 0.2075) <= 0.02, "KSG 0.2075 +- 0.02");
  o.note("MI " + fmt("%.4f", mi.value) + " bits, SE " + fmt("%.4f", mi.std_error));
  return o;
}

// 10. Full catalog sweep: no bound exceeds an achieved error.
Outcome sweep() {
  Outcome o;
  const ExperimentConfig cfg = parse_config(Json::parse(R"({
    "name": "acceptance_sweep", "models": "all", "recursive": "all", "learning": true,
    "horizons": [1, 2, 3],
    "samples": {"paths": 20, "length": 5000, "seed": 20240510},
    "estimator": {"resamples": 10, "diag_points": 10000, "diag_resamples": 10}})"));
  const auto r = run_experiment(cfg);
  std::size_t equality = 0, strict = 0, degenerate = 0, failed_checks = 0;
  for (const auto& row : r.rows) {
    equality += row.report.verdict == Verdict::Equality;
    strict += row.report.verdict == Verdict::Strict;
    degenerate += row.report.verdict == Verdict::Degenerate;
  }
  for (const auto& c : r.checks) failed_checks += !c.pass;
  const std::size_t cells = r.rows.size() + r.violations.size();
  o.require(cells >= 120, "at least 120 cells");
  o.require(r.violations.empty(), std::to_string(r.violations.size()) + " violations");
  for (const auto& v : r.violations) o.note(v);
  o.note(std::to_string(cells) + " cells: " + std::to_string(equality) + " equality, " + std::to_string(strict) +
         " strict, " + std::to_string(degenerate) + " degenerate; " + std::to_string(failed_checks) + "/" +
         std::to_string(r.checks.size()) + " embedded checks failed");
  return o;
}

struct Criterion {
  int id;
  const char* title;
  double budget_s;  // 0: none
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  const std::vector<Criterion> criteria = {
      {1, "Szego identity", 5.0, szego},
      {2, "Wiener-Masani identity", 0.0, wiener_masani},
      {3, "achievability, Gaussian AR(1) + Levinson(1)", 30.0, achievability},
      {4, "strictness, zero predictor", 0.0, strictness},
      {5, "m-step bound, AR(1) a=0.9", 0.0, mstep},
      {6, "non-Gaussian bound, Laplace and uniform", 0.0, nongaussian},
      {7, "recursive systems", 0.0, recursive},
      {8, "learning bound", 0.0, learning},
      {9, "estimator calibration", 0.0, nullptr},
      {10, "soundness sweep", 600.0, sweep},
  };

  bool all = true;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    Outcome out;
    double secs = 0.0;
    if (c.id == 9) {
      // each estimator run has its own 60 s budget
      for (auto* part : {entropy_calibration, mi_calibration}) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome p = part();
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        p.require(dt < 60.0, "runtime " + fmt("%.1f", dt) + " s over 60 s");
        out.pass = out.pass && p.pass;
        out.note(p.detail + " [" + fmt("%.1f", dt) + " s]");
        secs += dt;
      }
    } else {
      const auto t0 = std::chrono::steady_clock::now();
      try {
        out = c.run();
      } catch (const std::exception& ex) {
        out.pass = false;
        out.note(std::string("exception: ") + ex.what());
      }
      secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (c.budget_s > 0.0) out.require(secs < c.budget_s, "runtime over " + fmt("%.0f", c.budget_s) + " s");
    }
    all = all && out.pass;
    std::printf("criterion %2d %s  %s (%.2f s): %s\n", c.id, out.pass ? "PASS" : "FAIL", c.title, secs,
                out.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
