#include "rnshmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace rnshmc {

double ess(const std::vector<double>& series) {
  const std::size_t n = series.size();
  if (n < 10) throw Error("ess needs at least 10 draws");
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = series[i] - mean;
  double c0 = 0.0;
  for (double v : x) c0 += v * v;
  if (!(c0 > 0.0)) throw Error("ess undefined for a constant series");

  auto rho = [&](std::size_t lag) {
    double c = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) c += x[i] * x[i + lag];
    return c / c0;
  };

  // tau = -1 + 2 sum_m Gamma_m, Gamma_m = rho(2m) + rho(2m+1), rho(0) = 1.
  double sum = 0.0;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    double pair = (m == 0 ? 1.0 : rho(2 * m)) + rho(2 * m + 1);
    if (!(pair > 0.0)) break;
    pair = std::min(pair, previous);
    previous = pair;
    sum += pair;
  }
  const double tau = -1.0 + 2.0 * sum;
  const double b = static_cast<double>(n);
  if (!(tau > 1.0)) return b;
  return b / tau;
}

REMTrace rem_trace(const Chain& chain, const Vector& referenceMean, bool includeExploration) {
  const double refNorm = referenceMean.norm();
  if (!(refNorm > 0.0)) throw Error("rem_trace needs a reference mean with non-zero norm");
  REMTrace out;
  out.referenceMean = referenceMean;
  Vector sum = Vector::Zero(referenceMean.size());
  double clock = 0.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (!includeExploration && chain.phase[i] != Phase::exploitation) continue;
    require_dim("rem_trace sample", referenceMean.size(), chain.samples[i].size());
    sum += chain.samples[i];
    clock += chain.seconds[i];
    ++k;
    out.times.push_back(clock);
    out.rem.push_back((sum / static_cast<double>(k) - referenceMean).norm() / refNorm);
  }
  return out;
}

double rem_at(const REMTrace& trace, double t) {
  if (trace.times.empty()) throw Error("empty REM trace");
  const auto it = std::upper_bound(trace.times.begin(), trace.times.end(), t);
  if (it == trace.times.begin()) return trace.rem.front();
  return trace.rem[static_cast<std::size_t>(std::distance(trace.times.begin(), it)) - 1];
}

DiagnosticsReport summarize(const Chain& chain, const std::string& method) {
  DiagnosticsReport r;
  r.method = method;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < chain.size(); ++i)
    if (chain.phase[i] == Phase::exploitation) idx.push_back(i);
  if (idx.size() < 10) throw Error("summarize needs at least 10 exploitation-phase samples");

  const std::size_t d = chain.dim();
  std::vector<double> series(idx.size());
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = 0; k < idx.size(); ++k)
      series[k] = chain.samples[idx[k]][static_cast<Eigen::Index>(j)];
    r.essPerDim.push_back(ess(series));
  }
  std::vector<double> sorted = r.essPerDim;
  std::sort(sorted.begin(), sorted.end());
  r.minEss = sorted.front();
  r.maxEss = sorted.back();
  const std::size_t mid = sorted.size() / 2;
  r.medianEss = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);

  std::size_t accepted = 0;
  for (auto i : idx) {
    accepted += chain.accepted[i] ? 1 : 0;
    r.divergences += chain.divergent[i] ? 1 : 0;
    r.totalSeconds += chain.seconds[i];
  }
  r.samples = idx.size();
  r.acceptanceRate = static_cast<double>(accepted) / static_cast<double>(idx.size());
  r.secondsPerIteration = r.totalSeconds / static_cast<double>(idx.size());
  r.minEssPerSecond = r.totalSeconds > 0.0 ? r.minEss / r.totalSeconds : 0.0;
  return r;
}

void attach_speedup(DiagnosticsReport& report, const DiagnosticsReport& baseline) {
  if (baseline.minEssPerSecond > 0.0) report.speedupVsBaseline = report.minEssPerSecond / baseline.minEssPerSecond;
}

DiagnosticsReport merge_reports(const std::vector<DiagnosticsReport>& reports) {
  if (reports.empty()) throw Error("merge_reports needs at least one report");
  DiagnosticsReport m;
  m.method = reports.front().method;
  m.essPerDim.assign(reports.front().essPerDim.size(), 0.0);
  double acc = 0.0;
  for (const auto& r : reports) {
    if (r.essPerDim.size() != m.essPerDim.size()) throw Error("merge_reports: dimension mismatch");
    for (std::size_t j = 0; j < r.essPerDim.size(); ++j) m.essPerDim[j] += r.essPerDim[j];
    acc += r.acceptanceRate * static_cast<double>(r.samples);
    m.samples += r.samples;
    m.totalSeconds += r.totalSeconds;
    m.divergences += r.divergences;
    if (r.trainingSeconds) m.trainingSeconds = m.trainingSeconds.value_or(0.0) + *r.trainingSeconds;
  }
  std::vector<double> sorted = m.essPerDim;
  std::sort(sorted.begin(), sorted.end());
  m.minEss = sorted.front();
  m.maxEss = sorted.back();
  const std::size_t mid = sorted.size() / 2;
  m.medianEss = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  m.acceptanceRate = acc / static_cast<double>(m.samples);
  m.secondsPerIteration = m.totalSeconds / static_cast<double>(m.samples);
  m.minEssPerSecond = m.totalSeconds > 0.0 ? m.minEss / m.totalSeconds : 0.0;
  return m;
}

nlohmann::json report_to_json(const DiagnosticsReport& r) {
  nlohmann::json j{{"acceptance_rate", r.acceptanceRate},
                   {"seconds_per_iteration", r.secondsPerIteration},
                   {"ess", {{"min", r.minEss}, {"median", r.medianEss}, {"max", r.maxEss}}},
                   {"min_ess_per_second", r.minEssPerSecond},
                   {"divergences", r.divergences}};
  if (r.speedupVsBaseline) j["speedup_vs_baseline"] = *r.speedupVsBaseline;
  if (!r.method.empty()) j["method"] = r.method;
  j["samples"] = r.samples;
  j["total_seconds"] = r.totalSeconds;
  j["ess_per_dim"] = r.essPerDim;
  if (r.trainingSeconds) j["training_seconds"] = *r.trainingSeconds;
  return j;
}

std::string table_header() {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s | %5s | %-22s | %8s | %11s | %6s", "Method", "AP",
                "ESS (min,median,max)", "s/Iter", "min(ESS)/s", "spdup");
  return buf;
}

std::string table_row(const DiagnosticsReport& r) {
  char ess[64];
  std::snprintf(ess, sizeof ess, "(%.0f,%.0f,%.0f)", r.minEss, r.medianEss, r.maxEss);
  char speed[32] = "-";
  if (r.speedupVsBaseline) std::snprintf(speed, sizeof speed, "%.2f", *r.speedupVsBaseline);
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-10s | %5.2f | %-22s | %8.4f | %11.2f | %6s",
                r.method.empty() ? "-" : r.method.c_str(), r.acceptanceRate, ess, r.secondsPerIteration,
                r.minEssPerSecond, speed);
  return buf;
}

}  // namespace rnshmc
