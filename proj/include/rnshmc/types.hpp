#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rnshmc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Position in parameter space. Length equals the dimension of the owning model.
using ParamVector = Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  DimensionError(const std::string& what, std::size_t expected, std::size_t got)
      : Error(what + ": expected dimension " + std::to_string(expected) + ", got " +
              std::to_string(got)) {}
};

/// Malformed or non-numeric input data (CSV files, training sets).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Linear algebra failure: non-positive-definite matrices, non-finite features.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Raised by the integrator when a trajectory leaves the finite domain.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(std::size_t step)
      : Error("non-finite state at leapfrog step " + std::to_string(step)), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

inline void require_dim(const char* what, std::size_t expected, Eigen::Index got) {
  if (static_cast<std::size_t>(got) != expected) throw DimensionError(what, expected, got);
}

}  // namespace rnshmc
