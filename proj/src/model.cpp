#include "rnshmc/model.hpp"

#include <cmath>
#include <sstream>

namespace rnshmc {

GaussianTarget::GaussianTarget(Matrix precision, Vector mean)
    : precision_(std::move(precision)), mean_(std::move(mean)) {
  if (precision_.rows() != precision_.cols())
    throw DimensionError("GaussianTarget precision must be square", precision_.rows(),
                         precision_.cols());
  require_dim("GaussianTarget mean", precision_.rows(), mean_.size());
  if ((precision_ - precision_.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw NumericalError("GaussianTarget precision is not symmetric");
  Eigen::LLT<Matrix> llt(precision_);
  if (llt.info() != Eigen::Success)
    throw NumericalError("GaussianTarget precision is not positive definite");
  Eigen::LLT<Matrix> cov(covariance());
  covarianceFactor_ = cov.matrixL();
}

GaussianTarget GaussianTarget::standard(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return GaussianTarget(Matrix::Identity(n, n), Vector::Zero(n));
}

GaussianTarget GaussianTarget::correlated(std::size_t dim, double major, double minor) {
  if (dim == 0 || major <= 0.0 || minor <= 0.0)
    throw Error("correlated Gaussian needs dim >= 1 and positive eigenvalues");
  const auto n = static_cast<Eigen::Index>(dim);
  const Vector u = Vector::Ones(n) / std::sqrt(static_cast<double>(dim));
  // Sigma = minor I + (major - minor) u u^T, inverted in closed form.
  Matrix precision = Matrix::Identity(n, n) / minor;
  precision.noalias() += (1.0 / major - 1.0 / minor) * u * u.transpose();
  precision = 0.5 * (precision + precision.transpose()).eval();
  return GaussianTarget(std::move(precision), Vector::Zero(n));
}

Matrix GaussianTarget::covariance() const {
  const auto n = precision_.rows();
  Matrix cov = precision_.llt().solve(Matrix::Identity(n, n));
  return 0.5 * (cov + cov.transpose());
}

double GaussianTarget::potential(const ParamVector& q) const {
  require_dim("GaussianTarget::potential", dim(), q.size());
  const Vector r = q - mean_;
  return 0.5 * r.dot(precision_ * r);
}

double GaussianTarget::potential_and_gradient(const ParamVector& q, Vector& grad) const {
  require_dim("GaussianTarget::potential_and_gradient", dim(), q.size());
  const Vector r = q - mean_;
  grad.noalias() = precision_ * r;
  return 0.5 * r.dot(grad);
}

Vector GaussianTarget::sample(Rng& rng) const {
  std::normal_distribution<double> normal;
  Vector z(mean_.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  return mean_ + covarianceFactor_ * z;
}

BananaTarget::BananaTarget(double bend, double scale) : bend_(bend), scale_(scale) {
  if (!(bend >= 0.0)) throw Error("banana bend must be >= 0");
  if (!(scale > 0.0)) throw Error("banana scale must be > 0");
}

double BananaTarget::potential(const ParamVector& q) const {
  require_dim("BananaTarget::potential", 2, q.size());
  const double s2 = scale_ * scale_;
  const double twist = q[1] + bend_ * (q[0] * q[0] - s2);
  return q[0] * q[0] / (2.0 * s2) + 0.5 * twist * twist;
}

double BananaTarget::potential_and_gradient(const ParamVector& q, Vector& grad) const {
  require_dim("BananaTarget::potential_and_gradient", 2, q.size());
  const double s2 = scale_ * scale_;
  const double twist = q[1] + bend_ * (q[0] * q[0] - s2);
  grad.resize(2);
  grad[0] = q[0] / s2 + twist * 2.0 * bend_ * q[0];
  grad[1] = twist;
  return q[0] * q[0] / (2.0 * s2) + 0.5 * twist * twist;
}

Vector BananaTarget::marginal_variance() const {
  const double s2 = scale_ * scale_;
  Vector v(2);
  v << s2, 1.0 + 2.0 * bend_ * bend_ * s2 * s2;
  return v;
}

LogisticRegressionTarget::LogisticRegressionTarget(Matrix design, Vector responses,
                                                   double priorVariance)
    : design_(std::move(design)), responses_(std::move(responses)),
      priorVariance_(priorVariance) {
  if (design_.rows() < 1) throw DataError("logistic regression needs at least one observation");
  require_dim("logistic regression responses", design_.rows(), responses_.size());
  if (!design_.allFinite()) throw DataError("logistic regression design has non-finite entries");
  for (Eigen::Index i = 0; i < responses_.size(); ++i) {
    if (responses_[i] != 0.0 && responses_[i] != 1.0) {
      std::ostringstream msg;
      msg << "logistic regression response " << i << " is " << responses_[i]
          << "; responses must be 0 or 1";
      throw DataError(msg.str());
    }
  }
  if (!(priorVariance_ > 0.0)) throw Error("prior variance must be > 0");
}

// Per-observation terms share t = exp(-|eta|) between
// softplus(eta) = max(eta, 0) + log1p(t) and the sigmoid. The loops work in
// place on eta; fresh N-length temporaries cost more than the arithmetic.
double LogisticRegressionTarget::potential(const ParamVector& q) const {
  require_dim("LogisticRegressionTarget::potential", dim(), q.size());
  const Vector eta = design_ * q;
  double u = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double e = eta[i];
    u += std::max(e, 0.0) + std::log1p(std::exp(-std::abs(e))) - responses_[i] * e;
  }
  return u + q.squaredNorm() / (2.0 * priorVariance_);
}

double LogisticRegressionTarget::potential_and_gradient(const ParamVector& q,
                                                         Vector& grad) const {
  require_dim("LogisticRegressionTarget::potential_and_gradient", dim(), q.size());
  Vector eta = design_ * q;
  double u = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double e = eta[i];
    const double t = std::exp(-std::abs(e));
    u += std::max(e, 0.0) + std::log1p(t) - responses_[i] * e;
    eta[i] = (e >= 0.0 ? 1.0 : t) / (1.0 + t) - responses_[i];  // residual
  }
  grad.noalias() = design_.transpose() * eta;
  grad += q / priorVariance_;
  return u + q.squaredNorm() / (2.0 * priorVariance_);
}

void LogisticRegressionTarget::gradient_into(const ParamVector& q, Vector& grad) const {
  require_dim("LogisticRegressionTarget::gradient", dim(), q.size());
  Vector eta = design_ * q;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double e = eta[i];
    const double t = std::exp(-std::abs(e));
    eta[i] = (e >= 0.0 ? 1.0 : t) / (1.0 + t) - responses_[i];
  }
  grad.noalias() = design_.transpose() * eta;
  grad += q / priorVariance_;
}

FunctionTarget::FunctionTarget(std::size_t dim, PotentialFn potential, GradientFn gradient,
                               std::string name)
    : dim_(dim), potential_(std::move(potential)), gradient_(std::move(gradient)),
      name_(std::move(name)) {}

double FunctionTarget::potential(const ParamVector& q) const {
  require_dim("FunctionTarget::potential", dim_, q.size());
  return potential_(q);
}

double FunctionTarget::potential_and_gradient(const ParamVector& q, Vector& grad) const {
  require_dim("FunctionTarget::potential_and_gradient", dim_, q.size());
  grad = gradient_(q);
  return potential_(q);
}

SyntheticLogisticData generate_lr_data(std::size_t dim, std::size_t observations,
                                       std::uint64_t seed) {
  if (dim < 2) throw Error("synthetic logistic data needs dim >= 2");
  if (observations < 1) throw Error("synthetic logistic data needs at least one observation");
  Rng rng = make_stream(seed, Stream::data);
  std::normal_distribution<double> normal(0.0, 0.1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto n = static_cast<Eigen::Index>(observations);
  const auto d = static_cast<Eigen::Index>(dim);
  SyntheticLogisticData out;
  out.trueCoefficients.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) out.trueCoefficients[j] = unit(rng);

  Matrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = 0.1;
    for (Eigen::Index j = 1; j < d; ++j) x(i, j) = normal(rng);
  }
  const Vector eta = x * out.trueCoefficients;
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = unit(rng) < sigmoid(eta[i]) ? 1.0 : 0.0;

  out.data.features = std::move(x);
  out.data.labels = std::move(y);
  out.data.featureNames.reserve(dim);
  for (std::size_t j = 0; j < dim; ++j) out.data.featureNames.push_back("x" + std::to_string(j + 1));
  out.data.labelName = "y";
  return out;
}

Vector finite_difference_gradient(const TargetModel& target, const ParamVector& q, double h) {
  Vector g(q.size());
  ParamVector x = q;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    x[i] = q[i] + h;
    const double up = target.potential(x);
    x[i] = q[i] - h;
    const double down = target.potential(x);
    x[i] = q[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace rnshmc
