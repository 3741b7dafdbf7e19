#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include "varbound/errors.hpp"
#include "varbound/experiment.hpp"
#include "varbound/io.hpp"
#include "varbound/parallel.hpp"
#include "varbound/procgen.hpp"

namespace fs = std::filesystem;
using namespace varbound;

namespace {

enum ExitCode { kOk = 0, kConfigExit = 2, kViolationExit = 3, kDegenerateExit = 4 };

struct Common {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
};

ExperimentConfig load(const Common& o) {
  Json doc = read_json(o.config);
  if (o.seed) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    doc["samples"]["seed"] = *o.seed;
  }
  ExperimentConfig c = parse_config(doc);
  if (o.workers) c.workers = *o.workers;
  if (c.workers != 0) set_default_workers(c.workers);
  return c;
}

fs::path out_dir(const Common& o) {
  fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  return f;
}

int cmd_simulate(const Common& o) {
  const ExperimentConfig c = load(o);
  const fs::path dir = out_dir(o);
  const bool single = c.models.size() + c.recursive.size() == 1;
  auto file_for = [&](const std::string& name) {
    return dir / (single ? std::string("samples.csv") : "samples_" + name + ".csv");
  };
  for (const auto& [name, model] : c.models) {
    const SampleSet s = simulate(model, c.samples.length, c.samples.paths, c.samples.seed, c.samples.burn_in, c.workers);
    auto f = open_out(file_for(name));
    write_samples_csv(f, s);
  }
  for (const auto& [name, spec] : c.recursive) {
    const RecursiveRun r = simulate_recursive(spec, c.samples.length, c.samples.paths, c.samples.seed, c.workers);
    auto f = open_out(file_for(name));
    write_samples_csv(f, r.states);
  }
  write_json(dir / "meta.json", config_echo(c));
  return kOk;
}

Json runs_json(const ExperimentResult& r) {
  Json runs = Json::array();
  for (const auto& run : r.runs) runs.push_back(to_json(run));
  return runs;
}

int cmd_predict(const Common& o) {
  ExperimentConfig c = load(o);
  c.run_bounds = false;
  c.run_diagnostics = false;
  const ExperimentResult r = run_experiment(c);
  write_json(out_dir(o) / "predict.json", {{"meta", config_echo(c)}, {"runs", runs_json(r)}});
  return kOk;
}

int cmd_diagnose(const Common& o) {
  ExperimentConfig c = load(o);
  c.run_bounds = false;
  c.run_diagnostics = true;
  const ExperimentResult r = run_experiment(c);
  write_json(out_dir(o) / "diagnostics.json", {{"meta", config_echo(c)}, {"runs", runs_json(r)}});
  return kOk;
}

int cmd_bound(const Common& o) {
  const ExperimentConfig c = load(o);
  const ExperimentResult r = run_experiment(c);
  Json rows = Json::array();
  for (const auto& row : r.rows) rows.push_back(to_json(row));
  Json checks = Json::array();
  for (const auto& ch : r.checks) checks.push_back(to_json(ch));
  write_json(out_dir(o) / "bounds.json",
             {{"meta", config_echo(c)}, {"rows", rows}, {"checks", checks}, {"violations", r.violations}});
  for (const auto& v : r.violations) std::cerr << v << '\n';
  for (const auto& ch : r.checks) {
    if (!ch.pass) std::cerr << "check failed: " << ch.name << (ch.detail.empty() ? "" : " (" + ch.detail + ")") << '\n';
  }
  return r.violations.empty() ? kOk : kViolationExit;
}

int cmd_report(const fs::path& run_dir) {
  const fs::path src = run_dir / "bounds.json";
  if (!fs::exists(src)) throw ConfigError("missing run artifact " + src.string());
  const Json doc = read_json(src);
  if (!doc.contains("rows") || !doc["rows"].is_array()) throw ConfigError(src.string() + " has no rows");
  auto f = open_out(run_dir / "report.csv");
  try {
    write_report_csv(f, doc["rows"]);
  } catch (const Json::exception& e) {
    throw ConfigError(src.string() + ": " + e.what());
  }
  return kOk;
}

int exit_for(ErrorClass cls) {
  switch (cls) {
    case ErrorClass::Violation:
      return kViolationExit;
    case ErrorClass::Degenerate:
      return kDegenerateExit;
    default:
      return kConfigExit;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy lower bounds on prediction error variance"};
  app.require_subcommand(1);
  Common opts;
  std::string run_dir;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out, "output directory");
    sub->add_option("--seed", opts.seed, "overrides samples.seed");
    sub->add_option("--workers", opts.workers, "thread bound (0 = hardware)");
  };
  auto* sim = app.add_subcommand("simulate", "write sample paths as CSV");
  auto* pred = app.add_subcommand("predict", "run predictors, write predict.json");
  auto* diag = app.add_subcommand("diagnose", "whitening diagnostics, write diagnostics.json");
  auto* bnd = app.add_subcommand("bound", "evaluate bounds, write bounds.json");
  for (auto* s : {sim, pred, diag, bnd}) add_common(s);
  auto* rep = app.add_subcommand("report", "turn a run's bounds.json into report.csv");
  rep->add_option("run_dir", run_dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigExit;
  }

  try {
    if (*sim) return cmd_simulate(opts);
    if (*pred) return cmd_predict(opts);
    if (*diag) return cmd_diagnose(opts);
    if (*bnd) return cmd_bound(opts);
    if (*rep) return cmd_report(run_dir);
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return exit_for(e.error_class());
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kConfigExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigExit;
  }
  return kOk;
}
