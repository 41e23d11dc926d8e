#pragma once

#include <vector>

#include "rnshmc/types.hpp"

namespace rnshmc {

/// Ordered (q, U(q)) pairs. Repeated states are allowed: a chain that rejects
/// a proposal contributes the same point again.
class TrainingSet {
 public:
  TrainingSet() = default;

  void add(const ParamVector& q, double target) {
    if (!points_.empty()) require_dim("TrainingSet::add", dim(), q.size());
    points_.push_back(q);
    targets_.push_back(target);
  }

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  std::size_t dim() const { return points_.empty() ? 0 : static_cast<std::size_t>(points_[0].size()); }

  const ParamVector& point(std::size_t i) const { return points_[i]; }
  double target(std::size_t i) const { return targets_[i]; }
  const std::vector<ParamVector>& points() const { return points_; }
  const std::vector<double>& targets() const { return targets_; }

  Vector target_vector() const {
    return Eigen::Map<const Vector>(targets_.data(), static_cast<Eigen::Index>(targets_.size()));
  }

  /// First `count` entries (all of them if count exceeds the size).
  TrainingSet prefix(std::size_t count) const {
    TrainingSet out;
    count = std::min(count, size());
    out.points_.assign(points_.begin(), points_.begin() + static_cast<std::ptrdiff_t>(count));
    out.targets_.assign(targets_.begin(), targets_.begin() + static_cast<std::ptrdiff_t>(count));
    return out;
  }

  /// Last `count` entries.
  TrainingSet suffix(std::size_t count) const {
    TrainingSet out;
    count = std::min(count, size());
    const auto from = static_cast<std::ptrdiff_t>(size() - count);
    out.points_.assign(points_.begin() + from, points_.end());
    out.targets_.assign(targets_.begin() + from, targets_.end());
    return out;
  }

 private:
  std::vector<ParamVector> points_;
  std::vector<double> targets_;
};

}  // namespace rnshmc
