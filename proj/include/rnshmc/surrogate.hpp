#pragma once

#include <cstdint>
#include <string>

#include "rnshmc/training_set.hpp"
#include "rnshmc/types.hpp"
#include <json.hpp>

namespace rnshmc {

enum class NodeKind { additive, rbf };

std::string to_string(NodeKind kind);
NodeKind parse_node_kind(const std::string& text);

/// Frozen random hidden layer.
///
/// Additive nodes compute softplus(w_i . q + d_i); rbf nodes compute
/// exp(-|q - c_i|^2 / (2 l_i^2)). Only the fields of the active kind are
/// populated.
struct HiddenNodes {
  NodeKind kind = NodeKind::additive;
  Matrix weights;  // additive: s x d
  Vector biases;   // additive: s
  Matrix centers;  // rbf: s x d
  Vector widths;   // rbf: s, strictly positive

  std::size_t size() const {
    return static_cast<std::size_t>(kind == NodeKind::additive ? weights.rows() : centers.rows());
  }
  std::size_t dim() const {
    return static_cast<std::size_t>(kind == NodeKind::additive ? weights.cols() : centers.cols());
  }

  /// The first `count` nodes; used to build nested networks.
  HiddenNodes head(std::size_t count) const;
};

struct NodeSamplingOptions {
  /// Express additive weights in coordinates standardized by the preview's
  /// per-dimension mean and standard deviation (needs >= 2 preview points).
  bool standardizeInputs = true;
  /// Multiplier on the N(0, I/d) additive weight draw.
  double weightScale = 1.0;
  /// Preview points used for the rbf median-distance width heuristic.
  std::size_t widthSubsample = 500;
};

/// Draws s hidden nodes. Additive: w ~ N(0, I/d), d ~ U[-1, 1]. Rbf: centers
/// drawn from the preview without replacement (with replacement when s exceeds
/// the preview size) and every width set to the median pairwise distance of a
/// preview subsample. Deterministic for a fixed seed.
HiddenNodes sample_hidden_nodes(NodeKind kind, std::size_t s, std::size_t dim,
                                const TrainingSet& preview, std::uint64_t seed,
                                const NodeSamplingOptions& options = {});

/// Median pairwise Euclidean distance of the given points (1.0 when undefined).
double median_pairwise_distance(const std::vector<ParamVector>& points);

/// Hidden-layer outputs at q followed by a constant 1 for the output bias.
Vector feature_map(const HiddenNodes& nodes, const ParamVector& q);

/// Row j is feature_map(nodes, data.point(j)).
Matrix feature_matrix(const HiddenNodes& nodes, const TrainingSet& data);

/// Single-hidden-layer network z(q) = sum_i v_i a(q; gamma_i) + b.
struct SurrogateModel {
  HiddenNodes nodes;
  Vector outputWeights;  // v, length s
  double outputBias = 0.0;
  double ridge = 0.0;
  std::uint64_t seed = 0;

  std::size_t dim() const { return nodes.dim(); }
  std::size_t size() const { return nodes.size(); }

  double eval(const ParamVector& q) const;
  Vector grad(const ParamVector& q) const;

  /// Output weights with the bias appended, length s + 1.
  Vector stacked_weights() const;
  void set_stacked_weights(const Vector& w);
};

/// Weights minimizing |H w - T|^2 + ridge |w|^2. With ridge = 0 this is the
/// minimum-norm least-squares solution H^+ T computed by SVD.
Vector solve_output_weights(const Matrix& features, const Vector& targets, double ridge);

/// Batch extreme-learning-machine fit of the output layer.
SurrogateModel elm_fit(const HiddenNodes& nodes, const TrainingSet& data, double ridge = 1e-6);

/// Variance over the training set of z(q_n) - t_n: the empirical potential
/// matching distance with the optimal constant offset removed.
double potential_matching_distance(const SurrogateModel& model, const TrainingSet& data);

nlohmann::json nodes_to_json(const HiddenNodes& nodes);
HiddenNodes nodes_from_json(const nlohmann::json& j);
nlohmann::json surrogate_to_json(const SurrogateModel& model);
SurrogateModel surrogate_from_json(const nlohmann::json& j);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

}  // namespace rnshmc
