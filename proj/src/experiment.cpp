#include "rnshmc/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <future>
#include <iomanip>
#include <sstream>

#include "rnshmc/dataset.hpp"

#ifndef RNSHMC_VERSION
#define RNSHMC_VERSION "0.0.0"
#endif

namespace rnshmc {
namespace fs = std::filesystem;
using nlohmann::json;

const char* version() { return RNSHMC_VERSION; }

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t seed_of(const ExperimentConfig& cfg) {
  if (!cfg.seed) throw ConfigError("run.seed is required (or pass --seed)");
  return *cfg.seed;
}

std::string method_label(const std::string& kind) {
  if (kind == "hmc") return "HMC";
  if (kind == "rns-hmc") return "RNS-HMC";
  if (kind == "arns-hmc") return "ARNS-HMC";
  if (kind == "gp-hmc") return "GP-HMC";
  return kind;
}

NodeSamplingOptions node_options(const SurrogateSpec& s) {
  NodeSamplingOptions o;
  o.standardizeInputs = s.standardizeInputs;
  o.weightScale = s.weightScale;
  return o;
}

bool over_budget(const ExperimentConfig& cfg, const Chain& chain) {
  const long budget = cfg.sampler.maxDivergences;
  return budget >= 0 && chain.divergences() > static_cast<std::size_t>(budget);
}

void check_divergences(const ExperimentConfig& cfg, const Chain& chain, std::size_t index) {
  if (over_budget(cfg, chain))
    throw DivergenceBudgetError("chain " + std::to_string(index) + " had " +
                                std::to_string(chain.divergences()) + " divergent trajectories (budget " +
                                std::to_string(cfg.sampler.maxDivergences) + "); reduce sampler.step_size");
}

}  // namespace

BuiltTarget build_target(const ExperimentConfig& cfg) {
  const TargetSpec& t = cfg.target;
  BuiltTarget out;
  std::ostringstream summary;
  if (t.kind == "gaussian") {
    out.model = std::make_shared<GaussianTarget>(GaussianTarget::standard(t.dim));
    summary << "standard Gaussian, d=" << t.dim;
  } else if (t.kind == "gaussian-correlated") {
    out.model = std::make_shared<GaussianTarget>(
        GaussianTarget::correlated(t.dim, t.majorEigenvalue, t.minorEigenvalue));
    summary << "correlated Gaussian, d=" << t.dim << ", eigenvalues " << t.majorEigenvalue << " / "
            << t.minorEigenvalue;
  } else if (t.kind == "banana") {
    out.model = std::make_shared<BananaTarget>(t.bend, t.scale);
    summary << "banana, bend=" << t.bend << ", scale=" << t.scale;
  } else if (t.kind == "logistic-sim") {
    // Simulated designs are used as generated; target.standardize applies to CSV input.
    auto sim = generate_lr_data(t.dim, t.observations, t.dataSeed);
    out.model = std::make_shared<LogisticRegressionTarget>(sim.data, t.priorVariance);
    out.trueCoefficients = sim.trueCoefficients;
    summary << "simulated logistic regression, d=" << t.dim << ", N=" << t.observations
            << ", data seed " << t.dataSeed;
  } else if (t.kind == "logistic-csv") {
    const fs::path path = resolve_path(cfg, t.path);
    Dataset data = load_csv_dataset(path, t.label, t.standardize);
    if (t.intercept) add_intercept(data);
    summary << "logistic regression on " << path.string() << ", d=" << data.cols() << ", N=" << data.rows();
    out.model = std::make_shared<LogisticRegressionTarget>(data, t.priorVariance);
  } else {
    throw ConfigError("unknown target.kind '" + t.kind + "'");
  }
  out.summary = summary.str();
  return out;
}

HMCConfig hmc_config(const ExperimentConfig& cfg, std::size_t dim, std::uint64_t seed) {
  HMCConfig h;
  h.stepSize = cfg.sampler.stepSize;
  h.maxLeapfrogSteps = cfg.sampler.leapfrogSteps;
  h.jitterSteps = cfg.sampler.jitter;
  h.seed = seed;
  const auto& m = cfg.sampler.mass;
  if (m.size() == 1) {
    h.massDiagonal = Vector::Constant(static_cast<Eigen::Index>(dim), m[0]);
  } else if (!m.empty()) {
    require_dim("sampler.mass", dim, static_cast<Eigen::Index>(m.size()));
    h.massDiagonal = Eigen::Map<const Vector>(m.data(), static_cast<Eigen::Index>(m.size()));
  }
  h.validate(dim);
  return h;
}

ParamVector initial_point(const ExperimentConfig& cfg, std::size_t dim) {
  const auto& q = cfg.sampler.initial;
  if (q.empty()) return ParamVector::Zero(static_cast<Eigen::Index>(dim));
  require_dim("sampler.initial", dim, static_cast<Eigen::Index>(q.size()));
  return Eigen::Map<const Vector>(q.data(), static_cast<Eigen::Index>(q.size()));
}

SamplerOutput run_sampler(const ExperimentConfig& cfg, const TargetModel& target, std::uint64_t seed,
                          const std::string& kind) {
  const std::size_t d = target.dim();
  const HMCConfig h = hmc_config(cfg, d, seed);
  const ParamVector q0 = initial_point(cfg, d);
  const auto& ph = cfg.phases;
  const auto& sur = cfg.surrogate;

  SamplerOutput out;
  out.method = method_label(kind);
  if (kind == "hmc") {
    out.chain = run_hmc(target, h, q0, ph.burnin + ph.samples, ph.burnin);
  } else if (kind == "rns-hmc" || kind == "gp-hmc") {
    RnsOptions o;
    o.burnIterations = ph.burnin;
    o.warmup = ph.warmup;
    o.postIterations = ph.samples;
    o.hidden = sur.hidden;
    o.nodeKind = parse_node_kind(sur.nodeKind);
    o.ridge = sur.ridge;
    o.nodeOptions = node_options(sur);
    o.includeRejected = sur.includeRejected;
    if (kind == "gp-hmc") {
      GPHyperparameters hyper;
      hyper.signalVariance = sur.gpSignalVariance;
      hyper.lengthScale = sur.gpLengthScale;
      hyper.noiseVariance = sur.gpNoiseVariance;
      o.trainer = gp_trainer(hyper, sur.gpMaxPoints);
    }
    RnsResult r = run_rns_hmc(target, h, q0, o);
    out.chain = std::move(r.chain);
    out.surrogate = std::move(r.surrogate);
    out.trainingSeconds = r.trainingSeconds;
  } else if (kind == "arns-hmc") {
    ArnsOptions o;
    o.iterations = ph.burnin + ph.samples;
    o.hidden = sur.hidden;
    o.nodeKind = parse_node_kind(sur.nodeKind);
    o.schedule.rule = cfg.adaptation.rule == "none" ? AdaptationSchedule::Rule::none
                                                     : AdaptationSchedule::Rule::harmonic;
    o.schedule.constant = cfg.adaptation.constant;
    o.initBatch = cfg.adaptation.initBatch;
    o.nodeOptions = node_options(sur);
    ArnsResult r = run_arns_hmc(target, h, q0, o);
    out.chain = std::move(r.chain);
    for (std::size_t i = 0; i < std::min(ph.burnin, out.chain.size()); ++i)
      out.chain.phase[i] = Phase::exploration;
    out.surrogate = std::move(r.surrogate);
    out.adaptiveState = std::move(r.state);
  } else {
    throw ConfigError("unknown sampler.kind '" + kind + "'");
  }
  // A chain that blew its divergence budget may be stuck at one point, where
  // ESS is undefined; the caller reports the budget instead.
  if (over_budget(cfg, out.chain)) return out;
  out.report = summarize(out.chain, out.method);
  out.report.trainingSeconds = out.trainingSeconds;
  return out;
}

void write_trace_csv(const fs::path& path, const Chain& chain, bool recordTiming) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << "iter,phase,accepted,potential,seconds";
  for (std::size_t j = 0; j < chain.dim(); ++j) out << ",q_" << j + 1;
  out << "\n" << std::setprecision(17);
  for (std::size_t i = 0; i < chain.size(); ++i) {
    out << i << ',' << to_string(chain.phase[i]) << ',' << (chain.accepted[i] ? 1 : 0) << ','
        << chain.potentials[i] << ',' << (recordTiming ? chain.seconds[i] : 0.0);
    for (Eigen::Index j = 0; j < chain.samples[i].size(); ++j) out << ',' << chain.samples[i][j];
    out << '\n';
  }
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

fs::path output_dir(const ExperimentConfig& cfg, const RunOptions& options) {
  if (options.outputDir) return *options.outputDir;
  return resolve_path(cfg, cfg.output);
}

std::string describe_plan(const ExperimentConfig& cfg, const RunOptions& options) {
  std::ostringstream out;
  const auto& ph = cfg.phases;
  out << "sampler    " << cfg.sampler.kind << "\n";
  out << "target     " << cfg.target.kind << " (d=" << (cfg.target.kind == "banana" ? 2 : cfg.target.dim);
  if (cfg.target.kind == "logistic-sim") out << ", N=" << cfg.target.observations;
  if (cfg.target.kind == "logistic-csv") out << ", " << resolve_path(cfg, cfg.target.path).string();
  out << ")\n";
  out << "leapfrog   step " << cfg.sampler.stepSize << ", L " << cfg.sampler.leapfrogSteps
      << (cfg.sampler.jitter ? " (jittered)" : "") << "\n";
  out << "phases     " << ph.burnin << " exploration, " << ph.samples << " exploitation";
  if (cfg.sampler.kind == "rns-hmc" || cfg.sampler.kind == "gp-hmc")
    out << "; training on iterations " << ph.warmup << ".." << ph.burnin;
  out << "\n";
  if (cfg.sampler.kind != "hmc")
    out << "surrogate  " << cfg.surrogate.nodeKind << ", s=" << cfg.surrogate.hidden << ", ridge "
        << cfg.surrogate.ridge << "\n";
  if (cfg.sampler.kind == "arns-hmc")
    out << "adaptation " << cfg.adaptation.rule << ", c=" << cfg.adaptation.constant << ", init batch "
        << cfg.adaptation.initBatch << "\n";
  out << "chains     " << options.chains << " (seeds " << seed_of(cfg) << ".."
      << seed_of(cfg) + options.chains - 1 << ")\n";
  out << "output     " << output_dir(cfg, options).string() << "\n";
  out << "config     " << config_hash(cfg) << "\n";
  return out.str();
}

json manifest_json(const ExperimentConfig& cfg, std::size_t chains) {
  return json{{"format", "rnshmc-manifest"},
              {"version", version()},
              {"config_hash", config_hash(cfg)},
              {"seed", seed_of(cfg)},
              {"chains", chains},
              {"sampler", cfg.sampler.kind},
              {"config", serialize_config(cfg)}};
}

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  validate_config(cfg);
  if (options.chains < 1) throw ConfigError("--chains must be >= 1");
  const std::uint64_t seed = seed_of(cfg);
  const BuiltTarget target = build_target(cfg);

  RunResult result;
  result.outputDir = output_dir(cfg, options);
  fs::create_directories(result.outputDir);

  std::vector<std::future<SamplerOutput>> jobs;
  for (std::size_t i = 0; i < options.chains; ++i) {
    jobs.push_back(std::async(options.chains > 1 ? std::launch::async : std::launch::deferred,
                              [&cfg, &target, seed, i] {
                                return run_sampler(cfg, *target.model, seed + i, cfg.sampler.kind);
                              }));
  }
  for (auto& job : jobs) result.chains.push_back(job.get());

  std::vector<DiagnosticsReport> reports;
  for (std::size_t i = 0; i < result.chains.size(); ++i) {
    const auto& c = result.chains[i];
    const fs::path trace = result.outputDir / (options.chains == 1 ? std::string("trace.csv")
                                                                    : "trace_" + std::to_string(i) + ".csv");
    write_trace_csv(trace, c.chain, cfg.recordTiming);
    result.files.push_back(trace);
    reports.push_back(c.report);
  }
  for (std::size_t i = 0; i < result.chains.size(); ++i) check_divergences(cfg, result.chains[i].chain, i);
  result.merged = options.chains == 1 ? reports[0] : merge_reports(reports);

  json report = report_to_json(result.merged);
  if (options.chains > 1) {
    report["chains"] = json::array();
    for (const auto& r : reports) report["chains"].push_back(report_to_json(r));
  }
  write_json(result.outputDir / "report.json", report);
  result.files.push_back(result.outputDir / "report.json");

  const auto& first = result.chains[0];
  if (first.adaptiveState) {
    json ckpt{{"surrogate", surrogate_to_json(*first.surrogate)},
              {"state", adaptive_state_to_json(*first.adaptiveState)}};
    write_json(result.outputDir / "adaptive_state.json", ckpt);
    result.files.push_back(result.outputDir / "adaptive_state.json");
  } else if (first.surrogate) {
    write_json(result.outputDir / "surrogate.json", surrogate_to_json(*first.surrogate));
    result.files.push_back(result.outputDir / "surrogate.json");
  }

  json manifest = manifest_json(cfg, options.chains);
  manifest["target"] = target.summary;
  manifest["files"] = json::array();
  for (const auto& f : result.files) manifest["files"].push_back(f.filename().string());
  write_json(result.outputDir / "manifest.json", manifest);
  result.files.push_back(result.outputDir / "manifest.json");
  return result;
}

CompareResult run_compare(const ExperimentConfig& cfg, const RunOptions& options) {
  validate_config(cfg);
  ExperimentConfig surrogateCfg = cfg;
  if (surrogateCfg.sampler.kind == "hmc") surrogateCfg.sampler.kind = "rns-hmc";
  validate_config(surrogateCfg);
  const std::uint64_t seed = seed_of(cfg);
  const BuiltTarget target = build_target(cfg);

  CompareResult out;
  out.outputDir = output_dir(cfg, options);
  fs::create_directories(out.outputDir);
  SamplerOutput base = run_sampler(cfg, *target.model, seed, "hmc");
  SamplerOutput fast = run_sampler(surrogateCfg, *target.model, seed, surrogateCfg.sampler.kind);
  check_divergences(cfg, base.chain, 0);
  check_divergences(cfg, fast.chain, 0);
  out.baseline = base.report;
  out.surrogate = fast.report;
  attach_speedup(out.baseline, out.baseline);
  attach_speedup(out.surrogate, out.baseline);
  out.table = table_header() + "\n" + table_row(out.baseline) + "\n" + table_row(out.surrogate) + "\n";

  json j = manifest_json(cfg, 1);
  j["target"] = target.summary;
  j["rows"] = json::array({report_to_json(out.baseline), report_to_json(out.surrogate)});
  write_json(out.outputDir / "compare.json", j);
  write_text(out.outputDir / "compare.txt", out.table);
  return out;
}

FixtureKind parse_fixture_kind(const std::string& text) {
  if (text == "lr-data") return FixtureKind::lrData;
  if (text == "reference-mean") return FixtureKind::referenceMean;
  throw ConfigError("unknown fixture kind '" + text + "' (expected lr-data or reference-mean)");
}

std::vector<fs::path> generate_fixture(const ExperimentConfig& cfg, FixtureKind kind,
                                       const std::optional<fs::path>& outDir) {
  const fs::path dir = outDir ? *outDir : resolve_path(cfg, cfg.output);
  fs::create_directories(dir);
  std::vector<fs::path> files;

  if (kind == FixtureKind::lrData) {
    if (cfg.target.dim < 2) throw ConfigError("target.dim must be >= 2 for lr-data");
    const auto sim = generate_lr_data(cfg.target.dim, cfg.target.observations, cfg.target.dataSeed);
    const fs::path csv = dir / "lr_data.csv";
    write_csv_dataset(csv, sim.data);
    json j{{"format", "rnshmc-lr-data"},
           {"true_coefficients", vector_to_json(sim.trueCoefficients)},
           {"provenance",
            {{"data_seed", cfg.target.dataSeed},
             {"dim", cfg.target.dim},
             {"observations", cfg.target.observations},
             {"recipe", "X = (0.1 * 1, X1), X1 ~ N(0, I/100), beta ~ U[0,1]^d, y ~ Bernoulli(sigmoid(X beta))"},
             {"csv_fnv1a", fnv1a_hex(read_text(csv))},
             {"version", version()}}}};
    write_json(dir / "lr_data.json", j);
    files = {csv, dir / "lr_data.json"};
    return files;
  }

  validate_config(cfg);
  const std::uint64_t seed = seed_of(cfg);
  const BuiltTarget target = build_target(cfg);
  const std::size_t d = target.model->dim();
  const HMCConfig h = hmc_config(cfg, d, seed);
  const Chain chain = run_hmc(*target.model, h, initial_point(cfg, d), cfg.fixture.burnin + cfg.fixture.iterations,
                              cfg.fixture.burnin);
  Vector mean = Vector::Zero(static_cast<Eigen::Index>(d));
  std::size_t n = 0;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (chain.phase[i] != Phase::exploitation) continue;
    mean += chain.samples[i];
    ++n;
  }
  mean /= static_cast<double>(n);
  const DiagnosticsReport rep = summarize(chain, "HMC");
  Vector se(static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < d; ++j) {
    double var = 0.0;
    for (std::size_t i = 0; i < chain.size(); ++i)
      if (chain.phase[i] == Phase::exploitation) var += std::pow(chain.samples[i][j] - mean[j], 2);
    var /= static_cast<double>(n - 1);
    se[j] = std::sqrt(var / rep.essPerDim[j]);
  }
  json provenance{{"seed", seed},
                  {"iterations", cfg.fixture.iterations},
                  {"burnin", cfg.fixture.burnin},
                  {"sampler", "hmc"},
                  {"step_size", cfg.sampler.stepSize},
                  {"leapfrog_steps", cfg.sampler.leapfrogSteps},
                  {"target", target.summary},
                  {"config_hash", config_hash(cfg)},
                  {"version", version()}};
  json j{{"format", "rnshmc-reference-mean"},
         {"mean", vector_to_json(mean)},
         {"standard_error", vector_to_json(se)},
         {"acceptance_rate", rep.acceptanceRate},
         {"provenance", provenance},
         {"provenance_hash", fnv1a_hex(provenance.dump())}};
  write_json(dir / "reference_mean.json", j);
  files.push_back(dir / "reference_mean.json");
  return files;
}

Vector load_reference_mean(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "rnshmc-reference-mean")
    throw DataError(path.string() + ": not a reference-mean file");
  return vector_from_json(j.at("mean"));
}

}  // namespace rnshmc
