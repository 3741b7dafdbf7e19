#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

#include "varbound/bounds.hpp"
#include "varbound/diagnostics.hpp"
#include "varbound/experiment.hpp"
#include "varbound/infotheory.hpp"
#include "varbound/predict.hpp"
#include "varbound/procgen.hpp"

namespace varbound {

using Json = nlohmann::json;

// Config documents. Throws ConfigError on schema problems, including a
// missing samples.seed.
ExperimentConfig parse_config(const Json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

ProcessModel parse_model(const Json& j);
RecursiveSpec parse_recursive(const Json& j);
InnovationSpec parse_innovation(const Json& j);
PredictorChoice parse_predictor(const std::string& s);
BoundKind bound_kind_from_string(const std::string& s);

Json to_json(const Matrix& m);
Json to_json(const InnovationSpec& s);
Json to_json(const ProcessModel& m);
Json to_json(const RecursiveSpec& s);
Json to_json(const InfoEstimate& e);
Json to_json(const DiagnosticVerdict& v);
Json to_json(const WhiteningVerdict& v);
Json to_json(const Bound& b);
Json to_json(const BoundReport& r);
Json to_json(const PredictorReport& r);  // summary only, no innovation stream
Json to_json(const EstimatorParams& p);
Json to_json(const ResultRow& r);
Json to_json(const PredictorRun& r);
Json to_json(const Check& c);

// Every setting of the run, defaults included.
Json config_echo(const ExperimentConfig& c);

// FNV-1a over the canonical JSON form.
std::uint64_t fnv1a(const std::string& bytes);
std::string model_hash(const ProcessModel& m);
std::string model_hash(const RecursiveSpec& s);

// path,k,x0,...,x{n-1}
void write_samples_csv(std::ostream& os, const SampleSet& s);
// omega,re(phi_00),im(phi_00),re(phi_01),...
void write_spectrum_csv(std::ostream& os, const SpectrumGrid& g);
// model,predictor,m,bound_kind,bound,achieved,gap,eps_mc,verdict,flags
void write_report_csv(std::ostream& os, const Json& rows);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace varbound
