#include "rnshmc/gp.hpp"

#include <cmath>

namespace rnshmc {
namespace {

Matrix stack_points(const TrainingSet& data) {
  Matrix x(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(data.dim()));
  for (std::size_t j = 0; j < data.size(); ++j) x.row(static_cast<Eigen::Index>(j)) = data.point(j).transpose();
  return x;
}

Matrix kernel_matrix(const Matrix& x, const GPHyperparameters& hyper) {
  const auto n = x.rows();
  Matrix k(n, n);
  const double scale = 2.0 * hyper.lengthScale * hyper.lengthScale;
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = hyper.signalVariance;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = hyper.signalVariance * std::exp(-(x.row(i) - x.row(j)).squaredNorm() / scale);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

void check_hyper(const GPHyperparameters& hyper) {
  if (!(hyper.signalVariance > 0.0) || !(hyper.lengthScale > 0.0) || !(hyper.noiseVariance >= 0.0))
    throw Error("GP hyperparameters must satisfy signal variance > 0, length scale > 0, noise >= 0");
}

}  // namespace

double GPSurrogate::kernel(const ParamVector& a, const ParamVector& b) const {
  return hyper_.signalVariance *
         std::exp(-(a - b).squaredNorm() / (2.0 * hyper_.lengthScale * hyper_.lengthScale));
}

double GPSurrogate::eval(const ParamVector& q) const {
  require_dim("GPSurrogate::eval", dim(), q.size());
  double m = offset_;
  for (Eigen::Index j = 0; j < inputs_.rows(); ++j) m += alpha_[j] * kernel(inputs_.row(j).transpose(), q);
  return m;
}

Vector GPSurrogate::grad(const ParamVector& q) const {
  require_dim("GPSurrogate::grad", dim(), q.size());
  // d/dq K(x_j, q) = K(x_j, q) (x_j - q) / l^2
  const double l2 = hyper_.lengthScale * hyper_.lengthScale;
  Matrix diff = inputs_.rowwise() - q.transpose();
  Vector coef(diff.rows());
  for (Eigen::Index j = 0; j < diff.rows(); ++j)
    coef[j] = alpha_[j] * hyper_.signalVariance * std::exp(-diff.row(j).squaredNorm() / (2.0 * l2)) / l2;
  return diff.transpose() * coef;
}

GPSurrogate gp_fit(const TrainingSet& data, const GPHyperparameters& hyper, bool centerTargets) {
  if (data.empty()) throw DataError("gp_fit needs at least one training point");
  check_hyper(hyper);
  GPSurrogate gp;
  gp.hyper_ = hyper;
  gp.inputs_ = stack_points(data);
  Vector t = data.target_vector();
  if (centerTargets) {
    gp.offset_ = t.mean();
    t.array() -= gp.offset_;
  }
  Matrix k = kernel_matrix(gp.inputs_, hyper);
  k.diagonal().array() += hyper.noiseVariance;
  Eigen::LLT<Matrix> llt(k);
  if (llt.info() != Eigen::Success)
    throw NumericalError("GP kernel matrix is not positive definite; increase the noise variance");
  gp.alpha_ = llt.solve(t);
  return gp;
}

SurrogateModel fit_kernel_network(const TrainingSet& data, const GPHyperparameters& hyper) {
  if (data.empty()) throw DataError("fit_kernel_network needs at least one training point");
  check_hyper(hyper);
  const Matrix x = stack_points(data);
  const Matrix h = kernel_matrix(x, hyper);  // hidden-layer outputs at the training points
  const Vector t = data.target_vector();
  // argmin |H v - t|^2 + sigma^2 v^T K v  =>  (H^T H + sigma^2 K) v = H^T t
  const Matrix normal = h.transpose() * h + hyper.noiseVariance * h;
  const Vector v = normal.fullPivLu().solve(h.transpose() * t);

  SurrogateModel net;
  net.nodes.kind = NodeKind::rbf;
  net.nodes.centers = x;
  net.nodes.widths = Vector::Constant(x.rows(), hyper.lengthScale);
  net.outputWeights = hyper.signalVariance * v;
  net.outputBias = 0.0;
  net.ridge = hyper.noiseVariance;
  return net;
}

}  // namespace rnshmc
