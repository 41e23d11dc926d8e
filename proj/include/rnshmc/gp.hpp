#pragma once

#include "rnshmc/surrogate.hpp"
#include "rnshmc/training_set.hpp"

namespace rnshmc {

struct GPHyperparameters {
  double signalVariance = 1.0;  // sigma_f^2
  double lengthScale = 1.0;     // l
  double noiseVariance = 1e-6;  // sigma^2
};

/// Full Gaussian-process regression with a squared-exponential kernel, used as
/// the baseline surrogate. Fitting costs O(N^3); each prediction O(N d).
class GPSurrogate {
 public:
  GPSurrogate() = default;

  /// Predictive mean m(q) = k(q)^T (K_N + sigma^2 I)^{-1} t, plus the constant
  /// offset removed before fitting (zero unless targets were centered).
  double eval(const ParamVector& q) const;
  Vector grad(const ParamVector& q) const;

  double kernel(const ParamVector& a, const ParamVector& b) const;

  const GPHyperparameters& hyper() const { return hyper_; }
  const Matrix& inputs() const { return inputs_; }
  const Vector& alpha() const { return alpha_; }
  double offset() const { return offset_; }
  std::size_t dim() const { return static_cast<std::size_t>(inputs_.cols()); }

 private:
  friend GPSurrogate gp_fit(const TrainingSet&, const GPHyperparameters&, bool);
  GPHyperparameters hyper_;
  Matrix inputs_;  // N x d
  Vector alpha_;
  double offset_ = 0.0;
};

/// Fits the GP by Cholesky factorization of K_N + sigma^2 I. When
/// `centerTargets` is set the model regresses t - mean(t) and adds the mean
/// back at prediction time.
GPSurrogate gp_fit(const TrainingSet& data, const GPHyperparameters& hyper,
                   bool centerTargets = false);

/// The same predictor expressed as a network with one rbf node per training
/// point (width l, output weights scaled by sigma_f^2), trained by
/// minimizing |K v - t|^2 + sigma^2 v^T K v through its normal equations.
/// Shares no solver code with gp_fit.
SurrogateModel fit_kernel_network(const TrainingSet& data, const GPHyperparameters& hyper);

}  // namespace rnshmc
