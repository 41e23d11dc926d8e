#include <doctest.h>

#include <cmath>
#include <random>

#include "rnshmc/diagnostics.hpp"

using namespace rnshmc;

namespace {

std::vector<double> ar1(std::size_t n, double rho, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::vector<double> x(n);
  x[0] = z(rng) / std::sqrt(1 - rho * rho);
  for (std::size_t i = 1; i < n; ++i) x[i] = rho * x[i - 1] + z(rng);
  return x;
}

Chain chain_of(const std::vector<Vector>& samples, double secondsEach = 0.01) {
  Chain c;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    c.samples.push_back(samples[i]);
    c.potentials.push_back(0.0);
    c.accepted.push_back(i % 4 != 0);
    c.divergent.push_back(false);
    c.seconds.push_back(secondsEach);
    c.phase.push_back(Phase::exploitation);
  }
  return c;
}

}  // namespace

TEST_CASE("ess of independent draws is close to the sample size") {
  const auto x = ar1(100000, 0.0, 1);
  const double r = ess(x) / 1e5;
  CHECK(r >= 0.9);
  CHECK(r <= 1.1);
}

TEST_CASE("ess of an AR(1) series matches (1 - rho) / (1 + rho)") {
  const auto x = ar1(100000, 0.5, 2);
  const double r = ess(x) / 1e5;
  CHECK(r >= 0.30);
  CHECK(r <= 0.37);
}

TEST_CASE("ess is clamped to the sample size for anticorrelated series") {
  std::vector<double> alt(1000);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 ? 1.0 : -1.0;
  CHECK(ess(alt) == 1000.0);
  const auto neg = ar1(20000, -0.6, 3);
  CHECK(ess(neg) == 20000.0);
}

TEST_CASE("ess errors") {
  CHECK_THROWS(ess(std::vector<double>(50, 2.0)));
  CHECK_THROWS(ess(std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9}));
}

TEST_CASE("ess is invariant under affine maps") {
  const auto x = ar1(5000, 0.7, 4);
  std::vector<double> y(x.size()), z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = 2.0 * x[i];
    z[i] = -3.5 * x[i] + 100.0;
  }
  CHECK(ess(y) == ess(x));
  CHECK(ess(z) == doctest::Approx(ess(x)).epsilon(1e-10));
}

TEST_CASE("thinning an AR(1) chain by two") {
  const auto x = ar1(100000, 0.9, 5);
  std::vector<double> half;
  for (std::size_t i = 0; i < x.size(); i += 2) half.push_back(x[i]);
  const double ratio = ess(x) / ess(half);
  CHECK(ratio >= 1.0);
  CHECK(ratio <= 2.2);
}

TEST_CASE("relative error of the mean") {
  const Vector ref{{1.0, 2.0}};
  const auto c = chain_of(std::vector<Vector>(20, ref));
  const auto t = rem_trace(c, ref);
  CHECK(t.rem.size() == 20);
  for (double r : t.rem) CHECK(r == 0.0);
  CHECK(t.times.back() == doctest::Approx(0.2));

  const auto one = rem_trace(chain_of({Vector{{4.0, 6.0}}}), ref);
  CHECK(one.rem[0] == doctest::Approx(5.0 / std::sqrt(5.0)));

  CHECK_THROWS(rem_trace(c, Vector::Zero(2)));

  Chain mixed = chain_of({Vector{{9.0, 9.0}}, ref});
  mixed.phase[0] = Phase::exploration;
  CHECK(rem_trace(mixed, ref).rem == std::vector<double>{0.0});
  CHECK(rem_trace(mixed, ref, true).rem.size() == 2);

  CHECK(rem_at(t, 0.0) == t.rem.front());
  CHECK(rem_at(t, 0.055) == t.rem[4]);
  CHECK(rem_at(t, 99.0) == t.rem.back());
}

TEST_CASE("relative error of the mean decays on a gaussian target") {
  const Vector mu{{1.0, -1.0, 0.5}};
  const GaussianTarget g(Matrix::Identity(3, 3), mu);
  HMCConfig cfg;
  cfg.stepSize = 0.4;
  cfg.maxLeapfrogSteps = 5;
  cfg.jitterSteps = true;
  cfg.seed = 6;
  const auto chain = run_hmc(g, cfg, mu, 50000);
  const auto trace = rem_trace(chain, mu);
  CHECK(trace.rem.back() < 0.05);
  // Averaged over blocks, later blocks have smaller error.
  auto block = [&](std::size_t from, std::size_t to) {
    double s = 0.0;
    for (std::size_t i = from; i < to; ++i) s += trace.rem[i];
    return s / static_cast<double>(to - from);
  };
  CHECK(block(40000, 50000) < block(0, 1000));
  CHECK(block(10000, 20000) < block(100, 1000));
}

TEST_CASE("summary statistics") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> z;
  std::vector<Vector> s;
  for (int i = 0; i < 2000; ++i) s.push_back(Vector{{z(rng), z(rng), z(rng)}});
  Chain c = chain_of(s, 0.002);
  c.phase[0] = Phase::exploration;
  const auto r = summarize(c, "HMC");
  CHECK(r.samples == 1999);
  CHECK(r.essPerDim.size() == 3);
  CHECK(r.minEss <= r.medianEss);
  CHECK(r.medianEss <= r.maxEss);
  CHECK(r.acceptanceRate >= 0.0);
  CHECK(r.acceptanceRate <= 1.0);
  CHECK(r.totalSeconds == doctest::Approx(1999 * 0.002));
  CHECK(r.minEssPerSecond == doctest::Approx(r.minEss / r.totalSeconds));

  const auto again = summarize(c, "HMC");
  CHECK(again.essPerDim == r.essPerDim);
  CHECK(again.acceptanceRate == r.acceptanceRate);
  CHECK_THROWS(summarize(chain_of(std::vector<Vector>(5, Vector::Ones(1)))));
}

TEST_CASE("table rows and speedups") {
  DiagnosticsReport base;
  base.method = "HMC";
  base.acceptanceRate = 0.76;
  base.minEss = 1800;
  base.medianEss = 2000;
  base.maxEss = 2000;
  base.minEssPerSecond = 20.0;
  base.secondsPerIteration = 0.061;
  DiagnosticsReport fast = base;
  fast.method = "RNS-HMC";
  fast.minEssPerSecond = 174.4;
  attach_speedup(fast, base);
  REQUIRE(fast.speedupVsBaseline.has_value());
  CHECK(*fast.speedupVsBaseline == doctest::Approx(8.72));
  const std::string row = table_row(fast);
  CHECK(row.find("RNS-HMC") != std::string::npos);
  CHECK(row.find("8.72") != std::string::npos);
  CHECK(row.find("(1800,2000,2000)") != std::string::npos);
  CHECK(table_header().find("spdup") != std::string::npos);

  const auto j = report_to_json(fast);
  for (const char* key : {"acceptance_rate", "seconds_per_iteration", "ess", "min_ess_per_second", "divergences",
                          "speedup_vs_baseline"})
    CHECK(j.contains(key));
  CHECK(j["ess"].contains("median"));
  CHECK_FALSE(report_to_json(base).contains("speedup_vs_baseline"));
}

TEST_CASE("merging chains") {
  DiagnosticsReport a, b;
  a.essPerDim = {100, 50};
  a.samples = 1000;
  a.acceptanceRate = 0.8;
  a.totalSeconds = 2.0;
  b.essPerDim = {120, 70};
  b.samples = 3000;
  b.acceptanceRate = 0.6;
  b.totalSeconds = 2.0;
  const auto m = merge_reports({a, b});
  CHECK(m.essPerDim == std::vector<double>{220, 120});
  CHECK(m.minEss == 120);
  CHECK(m.acceptanceRate == doctest::Approx(0.65));
  CHECK(m.minEssPerSecond == doctest::Approx(30.0));
  CHECK(m.samples == 4000);
  CHECK_THROWS(merge_reports({}));
}
