#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rnshmc/types.hpp"

namespace rnshmc {

/// Invalid configuration; the message carries file and line context.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct TargetSpec {
  /// gaussian | gaussian-correlated | banana | logistic-sim | logistic-csv
  std::string kind = "gaussian";
  std::size_t dim = 2;
  double majorEigenvalue = 1.0;  // gaussian-correlated
  double minorEigenvalue = 0.01;
  double bend = 0.1;  // banana
  double scale = 10.0;
  std::size_t observations = 100000;  // logistic-sim
  std::uint64_t dataSeed = 1;
  double priorVariance = 100.0;
  std::string path;  // logistic-csv, relative to the config file
  std::string label = "y";
  bool standardize = true;
  bool intercept = false;

  bool operator==(const TargetSpec&) const = default;
};

struct SamplerSpec {
  std::string kind = "hmc";  // hmc | rns-hmc | arns-hmc | gp-hmc
  double stepSize = 0.1;
  std::size_t leapfrogSteps = 10;
  std::vector<double> mass;     // empty: identity; one value: isotropic
  std::vector<double> initial;  // empty: origin
  bool jitter = true;
  long maxDivergences = -1;  // negative: unlimited

  bool operator==(const SamplerSpec&) const = default;
};

struct SurrogateSpec {
  std::size_t hidden = 1000;
  std::string nodeKind = "additive";
  double ridge = 1e-6;
  double weightScale = 1.0;
  bool standardizeInputs = true;
  bool includeRejected = false;
  // gp-hmc; non-positive values are derived from the training data
  double gpSignalVariance = 0.0;
  double gpLengthScale = 0.0;
  double gpNoiseVariance = -1.0;
  std::size_t gpMaxPoints = 1000;

  bool operator==(const SurrogateSpec&) const = default;
};

struct PhaseSpec {
  std::size_t warmup = 1000;
  std::size_t burnin = 5000;
  std::size_t samples = 5000;

  bool operator==(const PhaseSpec&) const = default;
};

struct AdaptationSpec {
  std::string rule = "harmonic";  // harmonic | none
  double constant = 10.0;
  std::size_t initBatch = 100;

  bool operator==(const AdaptationSpec&) const = default;
};

struct FixtureSpec {
  std::size_t iterations = 200000;
  std::size_t burnin = 5000;

  bool operator==(const FixtureSpec&) const = default;
};

struct ExperimentConfig {
  TargetSpec target;
  SamplerSpec sampler;
  SurrogateSpec surrogate;
  PhaseSpec phases;
  AdaptationSpec adaptation;
  FixtureSpec fixture;
  std::optional<std::uint64_t> seed;
  std::string output = "out";
  bool recordTiming = true;
  std::string description;

  /// Directory of the config file; relative paths resolve against it.
  std::filesystem::path baseDir;

  bool operator==(const ExperimentConfig& o) const {
    return target == o.target && sampler == o.sampler && surrogate == o.surrogate &&
           phases == o.phases && adaptation == o.adaptation && fixture == o.fixture &&
           seed == o.seed && output == o.output && recordTiming == o.recordTiming &&
           description == o.description;
  }
};

/// Parses `[section]` headers and `key = value` lines; `#` starts a comment.
/// Unknown keys, malformed values and out-of-range values are rejected with
/// the source name and line number.
ExperimentConfig parse_config_text(const std::string& text, const std::string& sourceName = "<config>",
                                   const std::filesystem::path& baseDir = {});
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Canonical text form; parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

/// Cross-field checks: seed present, referenced files exist, phase ordering.
void validate_config(const ExperimentConfig& cfg);

/// 64-bit FNV-1a of the canonical text, hex encoded.
std::string config_hash(const ExperimentConfig& cfg);
std::string fnv1a_hex(const std::string& text);

std::filesystem::path resolve_path(const ExperimentConfig& cfg, const std::string& path);

}  // namespace rnshmc
