#include "varbound/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "varbound/catalog.hpp"
#include "varbound/errors.hpp"

namespace varbound {
namespace {

Matrix parse_matrix(const Json& j, std::size_t dim_hint) {
  if (j.is_number()) {
    const auto n = static_cast<Eigen::Index>(dim_hint);
    return j.get<double>() * Matrix::Identity(n, n);
  }
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw ConfigError("expected a number or a matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (j[static_cast<std::size_t>(r)].size() != static_cast<std::size_t>(cols)) throw ConfigError("ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

std::vector<Matrix> parse_coeffs(const Json& j, std::size_t dim) {
  std::vector<Matrix> out;
  if (j.is_null()) return out;
  if (!j.is_array()) throw ConfigError("coefficients must be a list");
  for (const auto& c : j) {
    Matrix m = parse_matrix(c, dim);
    if (static_cast<std::size_t>(m.rows()) != dim || static_cast<std::size_t>(m.cols()) != dim) {
      throw ConfigError("coefficient matrix does not match the innovation dimension");
    }
    out.push_back(std::move(m));
  }
  return out;
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

template <class T, class Fn>
std::vector<std::pair<std::string, T>> named_list(const Json& j, Fn&& parse, const std::string& what) {
  std::vector<std::pair<std::string, T>> out;
  auto one = [&](const Json& e, std::size_t idx) {
    if (e.is_string()) {
      out.emplace_back(e.get<std::string>(), parse(e));
    } else if (e.is_object()) {
      const std::string name = e.value("name", what + "_" + std::to_string(idx));
      out.emplace_back(name, parse(e));
    } else {
      throw ConfigError(what + " entries must be names or objects");
    }
  };
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) one(j[i], i);
  } else {
    one(j, 0);
  }
  return out;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

InnovationSpec parse_innovation(const Json& j) {
  if (!j.is_object()) throw ConfigError("innovation must be an object");
  check_keys(j, {"family", "variance", "cov", "nu"}, "innovation");
  const Family family = family_from_string(j.value("family", std::string("gaussian")));
  const double nu = j.value("nu", 0.0);
  InnovationSpec s;
  if (j.contains("cov")) {
    if (j.contains("variance")) throw ConfigError("innovation: give either variance or cov");
    s = InnovationSpec::vector(family, parse_matrix(j["cov"], 1), nu);
  } else {
    s = InnovationSpec::scalar(family, j.value("variance", 1.0), nu);
  }
  s.validate();
  return s;
}

ProcessModel parse_model(const Json& j) {
  if (j.is_string()) return catalog_model(j.get<std::string>());
  if (!j.is_object()) throw ConfigError("model must be a catalog name or an object");
  if (j.contains("catalog")) return catalog_model(j["catalog"].get<std::string>());
  check_keys(j, {"name", "ar", "ma", "innovation"}, "model");
  ProcessModel m;
  m.innovation = parse_innovation(j.value("innovation", Json::object()));
  m.dim = m.innovation.dim();
  m.ar = parse_coeffs(j.value("ar", Json()), m.dim);
  m.ma = parse_coeffs(j.value("ma", Json()), m.dim);
  m.validate();
  return m;
}

RecursiveSpec parse_recursive(const Json& j) {
  if (j.is_string()) return catalog_recursive(j.get<std::string>());
  if (!j.is_object()) throw ConfigError("recursive spec must be a catalog name or an object");
  if (j.contains("catalog")) return catalog_recursive(j["catalog"].get<std::string>());
  check_keys(j, {"name", "g", "f", "gain", "cap", "noise"}, "recursive");
  RecursiveSpec s;
  s.noise = parse_innovation(j.value("noise", Json::object()));
  const std::string g = j.value("g", std::string("difference"));
  if (g == "difference") s.g_form = RecursiveSpec::GForm::Difference;
  else if (g == "identity") s.g_form = RecursiveSpec::GForm::Identity;
  else if (g == "second_difference") s.g_form = RecursiveSpec::GForm::SecondDifference;
  else throw ConfigError("unknown g form '" + g + "'");
  const std::string f = j.value("f", std::string("zero"));
  if (f == "zero") s.f_form = RecursiveSpec::FForm::Zero;
  else if (f == "linear") s.f_form = RecursiveSpec::FForm::Linear;
  else if (f == "saturated_linear") s.f_form = RecursiveSpec::FForm::SaturatedLinear;
  else throw ConfigError("unknown f form '" + f + "'");
  const auto n = static_cast<Eigen::Index>(s.noise.dim());
  s.gain = j.contains("gain") ? parse_matrix(j["gain"], s.noise.dim()) : Matrix::Zero(n, n);
  s.cap = j.value("cap", 0.0);
  s.validate();
  return s;
}

PredictorChoice parse_predictor(const std::string& s) {
  const auto colon = s.find(':');
  const std::string kind = s.substr(0, colon);
  PredictorChoice c;
  if (kind == "levinson") c.kind = PredictorKind::Levinson;
  else if (kind == "multichannel_levinson") c.kind = PredictorKind::MultichannelLevinson;
  else if (kind == "truncated") c.kind = PredictorKind::Truncated;
  else if (kind == "zero") c.kind = PredictorKind::Zero;
  else if (kind == "model_mstep") c.kind = PredictorKind::ModelMstep;
  else throw ConfigError("unknown predictor '" + s + "'");
  if (colon != std::string::npos) {
    try {
      c.order = static_cast<std::size_t>(std::stoul(s.substr(colon + 1)));
    } catch (const std::exception&) {
      throw ConfigError("bad predictor order in '" + s + "'");
    }
  }
  return c;
}

BoundKind bound_kind_from_string(const std::string& s) {
  for (BoundKind k : {BoundKind::Estimation, BoundKind::Prediction1Step, BoundKind::PredictionMstep, BoundKind::Ks,
                      BoundKind::Wm, BoundKind::NonGaussian, BoundKind::Recursive, BoundKind::Learning,
                      BoundKind::EntropyPowerCap}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown bound kind '" + s + "'");
}

ExperimentConfig parse_config(const Json& doc) {
  try {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    check_keys(doc, {"name", "model", "models", "recursive", "predictors", "horizons", "samples", "estimator",
                     "bounds", "fit", "learning", "workers"},
               "config");
    ExperimentConfig c;
    c.name = doc.value("name", c.name);

    auto all_models = [] {
      std::vector<std::pair<std::string, ProcessModel>> v;
      for (const auto& m : model_catalog()) v.emplace_back(m.name, m.model);
      return v;
    };
    auto all_recursive = [] {
      std::vector<std::pair<std::string, RecursiveSpec>> v;
      for (const auto& r : recursive_catalog()) v.emplace_back(r.name, r.spec);
      return v;
    };
    for (const char* key : {"model", "models"}) {
      if (!doc.contains(key)) continue;
      const Json& j = doc[key];
      auto add = j.is_string() && j.get<std::string>() == "all"
                     ? all_models()
                     : named_list<ProcessModel>(j, [](const Json& e) { return parse_model(e); }, "model");
      c.models.insert(c.models.end(), add.begin(), add.end());
    }
    if (doc.contains("recursive")) {
      const Json& j = doc["recursive"];
      c.recursive = j.is_string() && j.get<std::string>() == "all"
                        ? all_recursive()
                        : named_list<RecursiveSpec>(j, [](const Json& e) { return parse_recursive(e); }, "recursive");
    }

    if (doc.contains("predictors")) {
      for (const auto& p : doc["predictors"]) c.predictors.push_back(parse_predictor(p.get<std::string>()));
    } else {
      c.predictors = default_predictors();
    }
    if (doc.contains("horizons")) c.horizons = doc["horizons"].get<std::vector<std::size_t>>();
    for (std::size_t m : c.horizons) {
      if (m == 0) throw ConfigError("horizons must be >= 1");
    }

    if (!doc.contains("samples") || !doc["samples"].is_object()) throw ConfigError("missing 'samples' section");
    const Json& s = doc["samples"];
    check_keys(s, {"paths", "length", "burn_in", "seed"}, "samples");
    if (!s.contains("seed") || !s["seed"].is_number_integer()) {
      throw ConfigError("samples.seed is mandatory (no ambient randomness)");
    }
    c.samples.seed = s["seed"].get<std::uint64_t>();
    c.samples.paths = s.value("paths", c.samples.paths);
    c.samples.length = s.value("length", c.samples.length);
    if (s.contains("burn_in") && !s["burn_in"].is_null()) c.samples.burn_in = s["burn_in"].get<std::size_t>();
    if (c.samples.paths == 0 || c.samples.length == 0) throw ConfigError("samples.paths and length must be >= 1");

    if (doc.contains("estimator")) {
      const Json& e = doc["estimator"];
      check_keys(e, {"k", "p", "n_freq", "alpha", "tail_fraction", "resamples", "max_points", "diag_depth",
                     "diag_points", "diag_resamples", "cross_check"},
                 "estimator");
      auto& p = c.estimator;
      p.k = e.value("k", p.k);
      p.depth = e.value("p", p.depth);
      p.n_freq = e.value("n_freq", p.n_freq);
      p.alpha = e.value("alpha", p.alpha);
      p.tail_fraction = e.value("tail_fraction", p.tail_fraction);
      p.resamples = e.value("resamples", p.resamples);
      p.max_points = e.value("max_points", p.max_points);
      p.diag_depth = e.value("diag_depth", p.diag_depth);
      p.diag_points = e.value("diag_points", p.diag_points);
      p.diag_resamples = e.value("diag_resamples", p.diag_resamples);
      p.cross_check = e.value("cross_check", p.cross_check);
      if (p.k == 0 || p.k > 64) throw ConfigError("estimator.k must be in 1..64");
      if (p.depth > 32) throw ConfigError("estimator.p must be <= 32");
      if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw ConfigError("estimator.alpha must be in (0, 1)");
      if (!(p.tail_fraction > 0.0 && p.tail_fraction <= 1.0)) throw ConfigError("estimator.tail_fraction must be in (0, 1]");
    }
    if (doc.contains("bounds")) {
      for (const auto& b : doc["bounds"]) c.bounds.push_back(bound_kind_from_string(b.get<std::string>()));
    }
    const std::string fit = doc.value("fit", std::string("oracle"));
    if (fit != "oracle" && fit != "estimated") throw ConfigError("fit must be 'oracle' or 'estimated'");
    c.oracle_fit = fit == "oracle";
    if (doc.contains("learning")) {
      const Json& l = doc["learning"];
      if (l.is_boolean()) {
        if (l.get<bool>()) c.learning = LearningDemo{};
      } else if (l.is_object()) {
        check_keys(l, {"n_train", "prior_var", "noise_var", "ridge_lambda", "draws", "seed"}, "learning");
        LearningDemo d;
        d.n_train = l.value("n_train", d.n_train);
        d.prior_var = l.value("prior_var", d.prior_var);
        d.noise_var = l.value("noise_var", d.noise_var);
        d.ridge_lambda = l.value("ridge_lambda", d.noise_var / d.prior_var);
        d.draws = l.value("draws", d.draws);
        d.seed = l.value("seed", c.samples.seed);
        c.learning = d;
      } else {
        throw ConfigError("learning must be a boolean or an object");
      }
      if (c.learning && !l.is_object()) c.learning->seed = c.samples.seed;
    }
    c.workers = doc.value("workers", 0u);
    if (c.models.empty() && c.recursive.empty() && !c.learning) {
      throw ConfigError("config names no model, recursive spec or learning demo");
    }
    return c;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const DistributionError& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_json(path)); }

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(finite_or_null(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const InnovationSpec& s) {
  Json j{{"family", to_string(s.family)}, {"cov", to_json(s.cov)}};
  if (s.family == Family::StudentT) j["nu"] = s.nu;
  return j;
}

Json to_json(const ProcessModel& m) {
  Json ar = Json::array(), ma = Json::array();
  for (const auto& a : m.ar) ar.push_back(to_json(a));
  for (const auto& b : m.ma) ma.push_back(to_json(b));
  return {{"dim", m.dim}, {"ar", ar}, {"ma", ma}, {"innovation", to_json(m.innovation)}};
}

Json to_json(const RecursiveSpec& s) {
  return {{"g", to_string(s.g_form)}, {"f", to_string(s.f_form)}, {"gain", to_json(s.gain)},
          {"cap", s.cap},             {"noise", to_json(s.noise)}};
}

Json to_json(const InfoEstimate& e) {
  return {{"quantity", to_string(e.quantity)},
          {"value_bits", finite_or_null(e.value)},
          {"std_error", e.std_error},
          {"estimator", to_string(e.estimator)},
          {"params", {{"k", e.k}, {"n_samples", e.n_samples}, {"embedding_depth", e.embedding_depth}, {"dim", e.dim}}},
          {"flags", e.flags}};
}

Json to_json(const DiagnosticVerdict& v) {
  Json j{{"test", v.label()}, {"statistic", finite_or_null(v.statistic)}, {"alpha", v.alpha}, {"pass", v.pass}};
  if (v.p_value) {
    j["p_value"] = *v.p_value;
    j["dof"] = v.dof;
  } else {
    j["threshold_bits"] = v.threshold;
    j["std_error"] = v.std_error;
  }
  if (!v.flags.empty()) j["flags"] = v.flags;
  return j;
}

Json to_json(const WhiteningVerdict& v) {
  Json parts = Json::array();
  for (const auto& p : v.parts) parts.push_back(to_json(p));
  return {{"pass", v.pass}, {"tests", parts}};
}

Json to_json(const Bound& b) {
  Json inputs = Json::object();
  for (const auto& [k, v] : b.inputs) inputs[k] = finite_or_null(v);
  return {{"kind", to_string(b.kind)}, {"dim", b.dim},         {"m", b.horizon}, {"value", finite_or_null(b.value)},
          {"std_error", b.std_error},  {"flags", b.flags},     {"inputs", inputs}};
}

Json to_json(const BoundReport& r) {
  Json diags = Json::array();
  for (const auto& d : r.diagnostics) diags.push_back(to_json(d));
  return {{"bound", to_json(r.bound)},
          {"predictor", r.predictor},
          {"achieved", finite_or_null(r.achieved)},
          {"achieved_std_error", r.achieved_std_error},
          {"gap_ratio", finite_or_null(r.gap_ratio)},
          {"eps_mc", r.eps_mc},
          {"verdict", to_string(r.verdict)},
          {"diagnostics_pass", r.diagnostics_pass},
          {"diagnostics", diags},
          {"resolution", "equality is certified at Monte-Carlo resolution only"}};
}

Json to_json(const PredictorReport& r) {
  return {{"predictor", r.predictor},
          {"m", r.horizon},
          {"error_cov", to_json(r.error_cov)},
          {"det_error_cov", r.det_error_cov},
          {"det_std_error", r.det_std_error},
          {"n_paths", r.n_paths},
          {"tail_fraction", r.tail_fraction}};
}

Json to_json(const EstimatorParams& p) {
  return {{"k", p.k},
          {"p", p.depth},
          {"n_freq", p.n_freq},
          {"alpha", p.alpha},
          {"tail_fraction", p.tail_fraction},
          {"resamples", p.resamples},
          {"max_points", p.max_points},
          {"diag_depth", p.diag_depth},
          {"diag_points", p.diag_points},
          {"diag_resamples", p.diag_resamples},
          {"cross_check", p.cross_check}};
}

Json to_json(const ResultRow& r) {
  Json j = to_json(r.report);
  j["model"] = r.model;
  j["m"] = r.horizon;
  if (r.paper_literal) j["paper_literal_suspected_typo"] = *r.paper_literal;
  return j;
}

Json to_json(const PredictorRun& r) {
  Json j = to_json(r.report);
  j["model"] = r.model;
  if (!r.whitening.parts.empty()) j["whitening"] = to_json(r.whitening);
  return j;
}

Json to_json(const Check& c) { return {{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}}; }

Json config_echo(const ExperimentConfig& c) {
  Json models = Json::array();
  for (const auto& [name, m] : c.models) {
    models.push_back({{"name", name}, {"model", to_json(m)}, {"hash", model_hash(m)}});
  }
  Json rec = Json::array();
  for (const auto& [name, s] : c.recursive) {
    rec.push_back({{"name", name}, {"spec", to_json(s)}, {"hash", model_hash(s)}});
  }
  Json preds = Json::array();
  for (const auto& p : c.predictors) preds.push_back(p.label());
  Json bounds = Json::array();
  for (BoundKind b : c.bounds) bounds.push_back(to_string(b));
  Json j{{"name", c.name},
         {"models", models},
         {"recursive", rec},
         {"predictors", preds},
         {"horizons", c.horizons},
         {"samples",
          {{"paths", c.samples.paths},
           {"length", c.samples.length},
           {"burn_in", c.samples.burn_in ? Json(*c.samples.burn_in) : Json("auto")},
           {"seed", c.samples.seed}}},
         {"estimator", to_json(c.estimator)},
         {"bounds", bounds.empty() ? Json("all") : bounds},
         {"fit", c.oracle_fit ? "oracle" : "estimated"}};
  if (c.learning) {
    const auto& d = *c.learning;
    j["learning"] = {{"n_train", d.n_train}, {"prior_var", d.prior_var}, {"noise_var", d.noise_var},
                     {"ridge_lambda", d.ridge_lambda}, {"draws", d.draws}, {"seed", d.seed}};
  }
  return j;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string model_hash(const ProcessModel& m) { return hex64(fnv1a(to_json(m).dump())); }
std::string model_hash(const RecursiveSpec& s) { return hex64(fnv1a(to_json(s).dump())); }

void write_samples_csv(std::ostream& os, const SampleSet& s) {
  os << "path,k";
  for (std::size_t c = 0; c < s.dim(); ++c) os << ",x" << c;
  os << '\n';
  char buf[32];
  for (std::size_t p = 0; p < s.paths(); ++p) {
    for (std::size_t k = 0; k < s.length(); ++k) {
      os << p << ',' << k;
      for (std::size_t c = 0; c < s.dim(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", s.at(p, k, c));
        os << ',' << buf;
      }
      os << '\n';
    }
  }
}

void write_spectrum_csv(std::ostream& os, const SpectrumGrid& g) {
  os << "omega";
  for (std::size_t i = 0; i < g.dim; ++i) {
    for (std::size_t j = 0; j < g.dim; ++j) os << ",re(phi_" << i << j << "),im(phi_" << i << j << ")";
  }
  os << '\n';
  char buf[32];
  for (std::size_t k = 0; k < g.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", g.frequency(k));
    os << buf;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(g.dim); ++i) {
      for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(g.dim); ++j) {
        const Complex v = g.values[k](i, j);
        std::snprintf(buf, sizeof buf, "%.17g", v.real());
        os << ',' << buf;
        std::snprintf(buf, sizeof buf, "%.17g", v.imag());
        os << ',' << buf;
      }
    }
    os << '\n';
  }
}

void write_report_csv(std::ostream& os, const Json& rows) {
  os << "model,predictor,m,bound_kind,bound,achieved,gap,eps_mc,verdict,flags\n";
  auto num = [](const Json& v) {
    if (v.is_null()) return std::string("nan");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v.get<double>());
    return std::string(buf);
  };
  for (const auto& r : rows) {
    std::string flags;
    for (const auto& f : r["bound"]["flags"]) flags += (flags.empty() ? "" : ";") + f.get<std::string>();
    os << r["model"].get<std::string>() << ',' << r["predictor"].get<std::string>() << ','
       << r["m"].get<std::size_t>() << ',' << r["bound"]["kind"].get<std::string>() << ','
       << num(r["bound"]["value"]) << ',' << num(r["achieved"]) << ',' << num(r["gap_ratio"]) << ','
       << num(r["eps_mc"]) << ',' << r["verdict"].get<std::string>() << ',' << flags << '\n';
  }
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("write failed for " + path.string());
}

}  // namespace varbound
