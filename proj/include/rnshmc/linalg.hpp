#pragma once

#include <algorithm>
#include <limits>

#include "rnshmc/types.hpp"

namespace rnshmc {

/// Singular values below eps * max(rows, cols) * sigma_max are treated as zero.
inline double pinv_cutoff(const Vector& singular, Eigen::Index rows, Eigen::Index cols) {
  if (singular.size() == 0) return 0.0;
  return std::numeric_limits<double>::epsilon() *
         static_cast<double>(std::max(rows, cols)) * singular.maxCoeff();
}

/// Moore-Penrose pseudoinverse via SVD. Empty inputs give the empty transpose.
inline Matrix pseudo_inverse(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return Matrix::Zero(a.cols(), a.rows());
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double cutoff = pinv_cutoff(sv, a.rows(), a.cols());
  Vector inv = Vector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cutoff) inv[i] = 1.0 / sv[i];
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace rnshmc
