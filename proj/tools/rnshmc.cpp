// Command-line front end: run, compare, validate and fixture subcommands.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rnshmc/experiment.hpp"

namespace {

enum Exit { ok = 0, failure = 1, configError = 2, divergenceBudget = 3 };

int report_error(const char* type, const std::string& message, int code) {
  nlohmann::json j{{"error", {{"type", type}, {"message", message}}}, {"exit_code", code}};
  std::cerr << j.dump() << "\n";
  return code;
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment config file")->required();
  cmd->add_option("--seed", c.seed, "root seed, overrides run.seed");
  cmd->add_option("--out", c.out, "output directory, overrides run.output");
}

rnshmc::ExperimentConfig load(const Common& c) {
  auto cfg = rnshmc::parse_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

rnshmc::RunOptions run_options(const Common& c, std::size_t chains) {
  rnshmc::RunOptions o;
  o.chains = chains;
  if (!c.out.empty()) o.outputDir = c.out;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Surrogate-accelerated Hamiltonian Monte Carlo"};
  app.set_version_flag("--version", std::string(rnshmc::version()));
  app.require_subcommand(1);

  Common runArgs, cmpArgs, valArgs, fixArgs;
  std::size_t chains = 1;
  bool dryRun = false;
  std::string fixtureKind;

  auto* run = app.add_subcommand("run", "run the configured sampler and write outputs");
  add_common(run, runArgs);
  run->add_option("--chains", chains, "independent chains (seeds seed, seed+1, ...)")
      ->check(CLI::PositiveNumber);
  run->add_flag("--dry-run", dryRun, "validate and print the plan without sampling");

  auto* cmp = app.add_subcommand("compare", "HMC against the surrogate sampler, with speedup");
  add_common(cmp, cmpArgs);

  auto* val = app.add_subcommand("validate", "parse and validate a config");
  add_common(val, valArgs);

  auto* fix = app.add_subcommand("fixture", "generate a dataset or reference-mean fixture");
  add_common(fix, fixArgs);
  fix->add_option("--kind", fixtureKind, "lr-data | reference-mean")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : configError;
  }

  try {
    if (*run) {
      const auto cfg = load(runArgs);
      const auto options = run_options(runArgs, chains);
      rnshmc::validate_config(cfg);
      if (dryRun) {
        std::cout << rnshmc::describe_plan(cfg, options);
        return ok;
      }
      const auto result = rnshmc::run_experiment(cfg, options);
      std::cout << rnshmc::table_header() << "\n" << rnshmc::table_row(result.merged) << "\n";
      std::cout << "wrote " << result.outputDir.string() << "\n";
    } else if (*cmp) {
      const auto cfg = load(cmpArgs);
      const auto result = rnshmc::run_compare(cfg, run_options(cmpArgs, 1));
      std::cout << result.table;
    } else if (*val) {
      const auto cfg = load(valArgs);
      rnshmc::validate_config(cfg);
      std::cout << "ok " << rnshmc::config_hash(cfg) << "\n";
    } else if (*fix) {
      const auto cfg = load(fixArgs);
      const auto kind = rnshmc::parse_fixture_kind(fixtureKind);
      std::optional<std::filesystem::path> dir;
      if (!fixArgs.out.empty()) dir = fixArgs.out;
      for (const auto& f : rnshmc::generate_fixture(cfg, kind, dir)) std::cout << f.string() << "\n";
    }
  } catch (const rnshmc::ConfigError& e) {
    return report_error("config", e.what(), configError);
  } catch (const rnshmc::DivergenceBudgetError& e) {
    return report_error("divergence_budget", e.what(), divergenceBudget);
  } catch (const rnshmc::DataError& e) {
    return report_error("data", e.what(), failure);
  } catch (const std::exception& e) {
    return report_error("runtime", e.what(), failure);
  }
  return ok;
}
