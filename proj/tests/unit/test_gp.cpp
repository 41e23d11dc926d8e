#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rnshmc/gp.hpp"

using namespace rnshmc;

namespace {

TrainingSet random_set(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TrainingSet t;
  for (std::size_t i = 0; i < n; ++i) {
    const Vector q = oracle::random_vector(static_cast<Eigen::Index>(d), rng);
    t.add(q, std::cos(q(0)) + 0.3 * q.squaredNorm());
  }
  return t;
}

// k(a, b) = sigma_f^2 exp(-|a - b|^2 / (2 l^2)), mean via a dense LU solve.
double reference_mean(const TrainingSet& data, const GPHyperparameters& h, const Vector& q) {
  const auto n = static_cast<Eigen::Index>(data.size());
  Matrix K(n, n);
  Vector k(n);
  auto kern = [&](const Vector& a, const Vector& b) {
    return h.signalVariance * std::exp(-(a - b).squaredNorm() / (2 * h.lengthScale * h.lengthScale));
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) K(i, j) = kern(data.point(i), data.point(j));
    K(i, i) += h.noiseVariance;
    k(i) = kern(data.point(i), q);
  }
  return k.dot(K.fullPivLu().solve(data.target_vector()));
}

}  // namespace

TEST_CASE("single training point is interpolated as the noise vanishes") {
  TrainingSet one;
  one.add(Vector{{0.3, -0.2}}, 4.0);
  GPHyperparameters h{1.0, 0.5, 1e-12};
  const auto gp = gp_fit(one, h);
  CHECK(gp.eval(Vector{{0.3, -0.2}}) == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("prediction decays far from the data") {
  const auto data = random_set(15, 2, 1);
  const auto gp = gp_fit(data, GPHyperparameters{1.0, 0.4, 1e-6});
  CHECK(std::abs(gp.eval(Vector{{20.0, 20.0}})) < 1e-12);

  const auto centered = gp_fit(data, GPHyperparameters{1.0, 0.4, 1e-6}, true);
  const double mean = data.target_vector().mean();
  CHECK(centered.eval(Vector{{20.0, 20.0}}) == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("predictive mean matches a dense reference") {
  const auto data = random_set(25, 3, 2);
  const GPHyperparameters h{2.0, 0.9, 1e-4};
  const auto gp = gp_fit(data, h);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const Vector q = oracle::random_vector(3, rng);
    const double want = reference_mean(data, h, q);
    CHECK(std::abs(gp.eval(q) - want) < 1e-9 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("gp gradient matches central differences") {
  const auto data = random_set(30, 3, 4);
  const auto gp = gp_fit(data, GPHyperparameters{1.5, 0.8, 1e-6}, true);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const Vector q = oracle::random_vector(3, rng);
    Vector fd(3);
    for (Eigen::Index j = 0; j < 3; ++j) {
      Vector a = q, b = q;
      a(j) += 1e-5;
      b(j) -= 1e-5;
      fd(j) = (gp.eval(a) - gp.eval(b)) / 2e-5;
    }
    const Vector g = gp.grad(q);
    CHECK((g - fd).norm() / std::max(1.0, g.norm()) < 1e-6);
  }
}

TEST_CASE("rbf network with ridge penalty v^T K v reproduces the gp mean") {
  const auto data = random_set(20, 3, 6);
  const GPHyperparameters h{1.3, 1.1, 1e-2};
  const auto gp = gp_fit(data, h);
  const auto net = fit_kernel_network(data, h);
  CHECK(net.size() == 20);
  CHECK(net.nodes.kind == NodeKind::rbf);
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Vector q = oracle::random_vector(3, rng);
    worst = std::max(worst, std::abs(gp.eval(q) - net.eval(q)));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("gp errors") {
  TrainingSet dup;
  dup.add(Vector{{1.0}}, 1.0);
  dup.add(Vector{{1.0}}, 2.0);
  try {
    gp_fit(dup, GPHyperparameters{1.0, 1.0, 0.0});
    FAIL("expected an error");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("noise variance") != std::string::npos);
  }
  CHECK_THROWS(gp_fit(TrainingSet{}, GPHyperparameters{}));
  CHECK_THROWS(gp_fit(dup, GPHyperparameters{-1.0, 1.0, 1e-3}));
}
