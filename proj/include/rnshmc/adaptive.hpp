#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "rnshmc/types.hpp"

namespace rnshmc {

/// Minimum-norm least-squares estimator v_k = H_k^+ T_k together with the
/// auxiliary matrices needed to extend it one row at a time:
///   Phi_k   = I - H_k^T (H_k^T)^+   (projector onto the null space of H_k)
///   Theta_k = H_k^+ (H_k^+)^T
struct AdaptiveState {
  Vector v;
  Matrix phi;
  Matrix theta;
  std::size_t count = 0;

  std::size_t width() const { return static_cast<std::size_t>(v.size()); }
};

enum class UpdateCase { inSpan, newDirection };

/// Batch initialization from K rows (K may be zero: v = 0, Phi = I, Theta = 0).
AdaptiveState init_adaptive(const Matrix& features, const Vector& targets);
AdaptiveState init_adaptive_empty(std::size_t width);

/// Appends the row (h, t) in O(width^2), independent of the number of rows
/// seen so far. The row counts as lying in the current row space when
/// |Phi h|^2 <= tau |h|^2.
UpdateCase adaptive_update(AdaptiveState& state, const Vector& h, double t, double tau = 1e-10);

/// |Phi^2 - Phi|_F.
double projector_defect(const AdaptiveState& state);

nlohmann::json adaptive_state_to_json(const AdaptiveState& state);
AdaptiveState adaptive_state_from_json(const nlohmann::json& j);

/// Adaptive estimator that retains its rows so it can rebuild the state from
/// scratch when rounding drift makes Phi stop being a projector.
class AdaptiveEstimator {
 public:
  struct Options {
    double tau = 1e-10;
    std::size_t checkInterval = 500;
    double driftTolerance = 1e-6;
  };

  AdaptiveEstimator(Matrix features, Vector targets);
  AdaptiveEstimator(Matrix features, Vector targets, Options options);

  UpdateCase update(const Vector& h, double t);

  const AdaptiveState& state() const { return state_; }
  const Vector& weights() const { return state_.v; }
  std::size_t count() const { return state_.count; }
  std::size_t reinitializations() const { return reinitializations_; }

  /// Batch solution on all retained rows.
  Matrix retained_features() const;
  Vector retained_targets() const;

 private:
  void rebuild();

  Options options_;
  AdaptiveState state_;
  std::vector<Vector> rows_;
  std::vector<double> targets_;
  std::size_t sinceCheck_ = 0;
  std::size_t reinitializations_ = 0;
};

}  // namespace rnshmc
