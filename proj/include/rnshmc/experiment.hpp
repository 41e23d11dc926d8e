#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rnshmc/config.hpp"
#include "rnshmc/diagnostics.hpp"
#include "rnshmc/hmc.hpp"

namespace rnshmc {

/// More divergent trajectories than sampler.max_divergences allows.
class DivergenceBudgetError : public Error {
 public:
  using Error::Error;
};

struct BuiltTarget {
  std::shared_ptr<const TargetModel> model;
  std::optional<ParamVector> trueCoefficients;  // logistic-sim only
  std::string summary;
};

BuiltTarget build_target(const ExperimentConfig& cfg);

HMCConfig hmc_config(const ExperimentConfig& cfg, std::size_t dim, std::uint64_t seed);
ParamVector initial_point(const ExperimentConfig& cfg, std::size_t dim);

struct SamplerOutput {
  std::string method;
  Chain chain;
  DiagnosticsReport report;
  std::optional<SurrogateModel> surrogate;
  std::optional<AdaptiveState> adaptiveState;
  std::optional<double> trainingSeconds;
};

/// Runs one chain of `kind` (hmc, rns-hmc, arns-hmc, gp-hmc). Every sampler
/// spends `burnin` iterations in the exploration phase followed by `samples`
/// exploitation iterations, so reports are comparable across kinds. The
/// report is left empty when the chain exceeded the divergence budget.
SamplerOutput run_sampler(const ExperimentConfig& cfg, const TargetModel& target, std::uint64_t seed,
                          const std::string& kind);

/// Columns iter, phase, accepted, potential, seconds, q_1..q_d. The seconds
/// column is written as 0 when timing is not recorded, so traces of repeated
/// runs compare byte for byte.
void write_trace_csv(const std::filesystem::path& path, const Chain& chain, bool recordTiming);

struct RunOptions {
  std::size_t chains = 1;
  std::optional<std::filesystem::path> outputDir;  // overrides cfg.output
};

struct RunResult {
  std::filesystem::path outputDir;
  std::vector<SamplerOutput> chains;
  DiagnosticsReport merged;
  std::vector<std::filesystem::path> files;
};

std::filesystem::path output_dir(const ExperimentConfig& cfg, const RunOptions& options);

/// Human-readable resolved plan; nothing is sampled.
std::string describe_plan(const ExperimentConfig& cfg, const RunOptions& options);

/// Runs the configured sampler on `options.chains` independent chains (seeds
/// seed, seed+1, ...) and writes trace CSVs, report.json, the surrogate
/// checkpoint when one was trained, and manifest.json. If any chain exceeded
/// the divergence budget, only the traces are written and
/// DivergenceBudgetError is thrown.
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

struct CompareResult {
  std::filesystem::path outputDir;
  DiagnosticsReport baseline;
  DiagnosticsReport surrogate;
  std::string table;
};

/// HMC against the configured surrogate sampler (rns-hmc when the config
/// names plain hmc) on the same target and seed, as a pair of table rows with
/// the speedup in min(ESS)/s.
CompareResult run_compare(const ExperimentConfig& cfg, const RunOptions& options = {});

enum class FixtureKind { lrData, referenceMean };
FixtureKind parse_fixture_kind(const std::string& text);

/// lr-data: lr_data.csv (features x1..xd, label y) and lr_data.json with
/// provenance. reference-mean: reference_mean.json holding the mean of a long
/// exact HMC run. Provenance blocks contain no timestamps, so repeated
/// generation yields identical files.
std::vector<std::filesystem::path> generate_fixture(const ExperimentConfig& cfg, FixtureKind kind,
                                                    const std::optional<std::filesystem::path>& outDir = {});

Vector load_reference_mean(const std::filesystem::path& path);

/// Library version string.
const char* version();

nlohmann::json manifest_json(const ExperimentConfig& cfg, std::size_t chains);

}  // namespace rnshmc
