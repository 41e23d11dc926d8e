#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "rnshmc/dataset.hpp"
#include "rnshmc/rng.hpp"
#include "rnshmc/types.hpp"

namespace rnshmc {

/// Numerically safe log(1 + exp(x)).
inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

/// Logistic sigmoid 1 / (1 + exp(-x)), stable for large |x|.
inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Target distribution P(q) proportional to exp(-U(q)).
///
/// Implementations are immutable after construction, so concurrent evaluation
/// from several chains is safe.
class TargetModel {
 public:
  virtual ~TargetModel() = default;

  virtual std::size_t dim() const = 0;
  virtual std::string name() const = 0;

  /// Potential energy U(q).
  virtual double potential(const ParamVector& q) const = 0;

  /// Potential and gradient in one evaluation. `grad` is resized as needed.
  virtual double potential_and_gradient(const ParamVector& q, Vector& grad) const = 0;

  /// Gradient alone, for targets where skipping the potential saves work.
  virtual void gradient_into(const ParamVector& q, Vector& grad) const { potential_and_gradient(q, grad); }

  Vector gradient(const ParamVector& q) const {
    Vector g;
    gradient_into(q, g);
    return g;
  }
};

/// U(q) = 1/2 (q - mean)^T precision (q - mean).
class GaussianTarget final : public TargetModel {
 public:
  GaussianTarget(Matrix precision, Vector mean);

  /// Standard normal in `dim` dimensions.
  static GaussianTarget standard(std::size_t dim);

  /// Correlated Gaussian whose covariance has eigenvector (1,...,1)/sqrt(d) with
  /// eigenvalue `major` and every orthogonal direction with eigenvalue `minor`.
  static GaussianTarget correlated(std::size_t dim, double major, double minor);

  std::size_t dim() const override { return static_cast<std::size_t>(mean_.size()); }
  std::string name() const override { return "gaussian"; }
  double potential(const ParamVector& q) const override;
  double potential_and_gradient(const ParamVector& q, Vector& grad) const override;

  const Matrix& precision() const { return precision_; }
  const Vector& mean() const { return mean_; }
  Matrix covariance() const;

  /// Exact independent draw.
  Vector sample(Rng& rng) const;

 private:
  Matrix precision_;
  Vector mean_;
  Matrix covarianceFactor_;  // lower Cholesky factor of the covariance
};

/// Twisted Gaussian in two dimensions:
///   U(q) = q1^2 / (2 scale^2) + 1/2 (q2 + bend (q1^2 - scale^2))^2.
/// The first coordinate is N(0, scale^2); the second, given q1, is unit
/// variance around -bend (q1^2 - scale^2). Both marginal means are zero.
class BananaTarget final : public TargetModel {
 public:
  explicit BananaTarget(double bend = 0.1, double scale = 10.0);

  std::size_t dim() const override { return 2; }
  std::string name() const override { return "banana"; }
  double potential(const ParamVector& q) const override;
  double potential_and_gradient(const ParamVector& q, Vector& grad) const override;

  double bend() const { return bend_; }
  double scale() const { return scale_; }

  /// Analytic marginal variances (scale^2, 1 + 2 bend^2 scale^4).
  Vector marginal_variance() const;

 private:
  double bend_;
  double scale_;
};

/// Bayesian logistic regression with an isotropic Gaussian prior N(0, priorVariance I):
///   U(q) = sum_i log(1 + exp(x_i^T q)) - y^T X q + |q|^2 / (2 priorVariance).
///
/// Sums over observations run sequentially in row order, so results are
/// bit-reproducible for a given design matrix.
class LogisticRegressionTarget final : public TargetModel {
 public:
  LogisticRegressionTarget(Matrix design, Vector responses, double priorVariance = 100.0);
  explicit LogisticRegressionTarget(const Dataset& data, double priorVariance = 100.0)
      : LogisticRegressionTarget(data.features, data.labels, priorVariance) {}

  std::size_t dim() const override { return static_cast<std::size_t>(design_.cols()); }
  std::string name() const override { return "logistic"; }
  double potential(const ParamVector& q) const override;
  double potential_and_gradient(const ParamVector& q, Vector& grad) const override;
  void gradient_into(const ParamVector& q, Vector& grad) const override;

  const Matrix& design() const { return design_; }
  const Vector& responses() const { return responses_; }
  double prior_variance() const { return priorVariance_; }
  std::size_t observations() const { return static_cast<std::size_t>(design_.rows()); }

 private:
  Matrix design_;
  Vector responses_;
  double priorVariance_;
};

/// Target defined by user callables; used for tests and small experiments.
class FunctionTarget final : public TargetModel {
 public:
  using PotentialFn = std::function<double(const ParamVector&)>;
  using GradientFn = std::function<Vector(const ParamVector&)>;

  FunctionTarget(std::size_t dim, PotentialFn potential, GradientFn gradient,
                 std::string name = "function");

  std::size_t dim() const override { return dim_; }
  std::string name() const override { return name_; }
  double potential(const ParamVector& q) const override;
  double potential_and_gradient(const ParamVector& q, Vector& grad) const override;

 private:
  std::size_t dim_;
  PotentialFn potential_;
  GradientFn gradient_;
  std::string name_;
};

/// Synthetic logistic-regression problem: design X = (1/10 * 1, X1) with
/// X1 ~ N(0, I/100), true coefficients beta ~ U[0,1]^d and labels
/// y_i ~ Bernoulli(sigmoid(x_i^T beta)).
struct SyntheticLogisticData {
  Dataset data;
  ParamVector trueCoefficients;
};

SyntheticLogisticData generate_lr_data(std::size_t dim, std::size_t observations,
                                       std::uint64_t seed);

/// Central finite-difference gradient of the potential, step h.
Vector finite_difference_gradient(const TargetModel& target, const ParamVector& q,
                                  double h = 1e-5);

}  // namespace rnshmc
