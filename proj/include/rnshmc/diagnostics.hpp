#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rnshmc/hmc.hpp"

namespace rnshmc {

/// Effective sample size B / (1 + 2 sum_k rho(k)) using Geyer's initial
/// monotone positive sequence: lag pairs rho(2m) + rho(2m+1) are summed until
/// the first non-positive pair and forced to be non-increasing. Clamped to B.
/// Throws for constant series or fewer than 10 draws.
double ess(const std::vector<double>& series);

struct REMTrace {
  std::vector<double> times;  // cumulative seconds
  std::vector<double> rem;    // |running mean - reference| / |reference|
  Vector referenceMean;
};

/// Relative error of the running mean against `referenceMean`. By default only
/// exploitation-phase samples enter the mean (and the clock).
REMTrace rem_trace(const Chain& chain, const Vector& referenceMean, bool includeExploration = false);

/// REM reached by wall-clock time `t` (the last trace entry at or before t;
/// the first entry if t precedes it).
double rem_at(const REMTrace& trace, double t);

struct DiagnosticsReport {
  std::string method;
  std::vector<double> essPerDim;
  double minEss = 0.0;
  double medianEss = 0.0;
  double maxEss = 0.0;
  double acceptanceRate = 0.0;
  double secondsPerIteration = 0.0;
  double totalSeconds = 0.0;
  double minEssPerSecond = 0.0;
  std::size_t divergences = 0;
  std::size_t samples = 0;
  std::optional<double> trainingSeconds;
  std::optional<double> speedupVsBaseline;
};

/// Statistics over the exploitation-phase samples of the chain (position
/// coordinates only).
DiagnosticsReport summarize(const Chain& chain, const std::string& method = "");

/// Sets report.speedupVsBaseline to the ratio of min(ESS)/s.
void attach_speedup(DiagnosticsReport& report, const DiagnosticsReport& baseline);

/// Pools independent chains: ESS adds across chains, timing adds, acceptance
/// and seconds per iteration are sample-weighted means.
DiagnosticsReport merge_reports(const std::vector<DiagnosticsReport>& reports);

nlohmann::json report_to_json(const DiagnosticsReport& report);

/// "Method | AP | ESS (min,median,max) | s/Iter | min(ESS)/s | spdup" row.
std::string table_header();
std::string table_row(const DiagnosticsReport& report);

}  // namespace rnshmc
