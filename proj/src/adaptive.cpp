#include "rnshmc/adaptive.hpp"

#include <cmath>

#include "rnshmc/linalg.hpp"
#include "rnshmc/surrogate.hpp"

namespace rnshmc {

AdaptiveState init_adaptive_empty(std::size_t width) {
  const auto w = static_cast<Eigen::Index>(width);
  return AdaptiveState{Vector::Zero(w), Matrix::Identity(w, w), Matrix::Zero(w, w), 0};
}

AdaptiveState init_adaptive(const Matrix& features, const Vector& targets) {
  require_dim("init_adaptive targets", features.rows(), targets.size());
  if (!features.allFinite() || !targets.allFinite())
    throw NumericalError("init_adaptive: non-finite features or targets");
  if (features.rows() == 0) return init_adaptive_empty(static_cast<std::size_t>(features.cols()));
  const Matrix pinv = pseudo_inverse(features);  // width x K
  const auto w = features.cols();
  AdaptiveState state;
  state.v = pinv * targets;
  // H^T (H^T)^+ = H^T (H^+)^T = (H^+ H)^T = H^+ H
  state.phi = Matrix::Identity(w, w) - pinv * features;
  state.phi = 0.5 * (state.phi + state.phi.transpose()).eval();
  state.theta = pinv * pinv.transpose();
  state.count = static_cast<std::size_t>(features.rows());
  return state;
}

UpdateCase adaptive_update(AdaptiveState& state, const Vector& h, double t, double tau) {
  require_dim("adaptive_update", state.width(), h.size());
  const Vector c = state.phi * h;
  const Vector thetaH = state.theta * h;
  const double hThetaH = h.dot(thetaH);
  Vector b;
  UpdateCase which;
  if (c.squaredNorm() <= tau * h.squaredNorm()) {
    which = UpdateCase::inSpan;
    b = thetaH / (1.0 + hThetaH);
    state.theta.noalias() -= thetaH * b.transpose();
  } else {
    which = UpdateCase::newDirection;
    b = c / c.squaredNorm();
    state.phi.noalias() -= c * b.transpose();  // Phi h = c
    state.theta.noalias() -= thetaH * b.transpose();
    state.theta.noalias() += (1.0 + hThetaH) * b * b.transpose();
    state.theta.noalias() -= b * thetaH.transpose();  // b h^T Theta^T
    state.phi = 0.5 * (state.phi + state.phi.transpose()).eval();
  }
  state.theta = 0.5 * (state.theta + state.theta.transpose()).eval();
  state.v += (t - h.dot(state.v)) * b;
  ++state.count;
  return which;
}

double projector_defect(const AdaptiveState& state) {
  return (state.phi * state.phi - state.phi).norm();
}

nlohmann::json adaptive_state_to_json(const AdaptiveState& state) {
  return {{"format", "rnshmc-adaptive-state"},
          {"version", 1},
          {"count", state.count},
          {"v", vector_to_json(state.v)},
          {"phi", matrix_to_json(state.phi)},
          {"theta", matrix_to_json(state.theta)}};
}

AdaptiveState adaptive_state_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "rnshmc-adaptive-state") throw DataError("not an adaptive state container");
  AdaptiveState state;
  state.count = j.at("count").get<std::size_t>();
  state.v = vector_from_json(j.at("v"));
  state.phi = matrix_from_json(j.at("phi"));
  state.theta = matrix_from_json(j.at("theta"));
  const auto w = state.v.size();
  if (state.phi.rows() != w || state.phi.cols() != w || state.theta.rows() != w || state.theta.cols() != w)
    throw DataError("adaptive state matrices do not match the estimator width");
  return state;
}

AdaptiveEstimator::AdaptiveEstimator(Matrix features, Vector targets)
    : AdaptiveEstimator(std::move(features), std::move(targets), Options{}) {}

AdaptiveEstimator::AdaptiveEstimator(Matrix features, Vector targets, Options options)
    : options_(options), state_(init_adaptive(features, targets)) {
  rows_.reserve(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    rows_.push_back(features.row(i).transpose());
    targets_.push_back(targets[i]);
  }
}

UpdateCase AdaptiveEstimator::update(const Vector& h, double t) {
  const auto which = adaptive_update(state_, h, t, options_.tau);
  rows_.push_back(h);
  targets_.push_back(t);
  if (++sinceCheck_ >= options_.checkInterval) {
    sinceCheck_ = 0;
    if (projector_defect(state_) > options_.driftTolerance) rebuild();
  }
  return which;
}

Matrix AdaptiveEstimator::retained_features() const {
  Matrix h(static_cast<Eigen::Index>(rows_.size()), static_cast<Eigen::Index>(state_.width()));
  for (std::size_t i = 0; i < rows_.size(); ++i) h.row(static_cast<Eigen::Index>(i)) = rows_[i].transpose();
  return h;
}

Vector AdaptiveEstimator::retained_targets() const {
  return Eigen::Map<const Vector>(targets_.data(), static_cast<Eigen::Index>(targets_.size()));
}

void AdaptiveEstimator::rebuild() {
  state_ = init_adaptive(retained_features(), retained_targets());
  ++reinitializations_;
}

}  // namespace rnshmc
