#include "rnshmc/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "rnshmc/linalg.hpp"
#include "rnshmc/model.hpp"
#include "rnshmc/rng.hpp"

namespace rnshmc {

std::string to_string(NodeKind kind) { return kind == NodeKind::additive ? "additive" : "rbf"; }

NodeKind parse_node_kind(const std::string& text) {
  if (text == "additive") return NodeKind::additive;
  if (text == "rbf") return NodeKind::rbf;
  throw Error("unknown node kind '" + text + "' (expected additive or rbf)");
}

HiddenNodes HiddenNodes::head(std::size_t count) const {
  const auto k = static_cast<Eigen::Index>(std::min(count, size()));
  HiddenNodes out;
  out.kind = kind;
  if (kind == NodeKind::additive) {
    out.weights = weights.topRows(k);
    out.biases = biases.head(k);
  } else {
    out.centers = centers.topRows(k);
    out.widths = widths.head(k);
  }
  return out;
}

double median_pairwise_distance(const std::vector<ParamVector>& points) {
  std::vector<double> dist;
  dist.reserve(points.size() * (points.size() - (points.empty() ? 0 : 1)) / 2);
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) dist.push_back((points[i] - points[j]).norm());
  if (dist.empty()) return 1.0;
  const auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
  std::nth_element(dist.begin(), mid, dist.end());
  double median = *mid;
  if (dist.size() % 2 == 0) {
    const double lower = *std::max_element(dist.begin(), mid);
    median = 0.5 * (median + lower);
  }
  return median > 0.0 ? median : 1.0;
}

HiddenNodes sample_hidden_nodes(NodeKind kind, std::size_t s, std::size_t dim,
                                const TrainingSet& preview, std::uint64_t seed,
                                const NodeSamplingOptions& options) {
  if (s < 1) throw Error("hidden layer needs at least one node");
  if (!preview.empty()) require_dim("sample_hidden_nodes preview", dim, preview.dim());
  Rng rng = make_stream(seed, Stream::nodes);
  const auto ns = static_cast<Eigen::Index>(s);
  const auto nd = static_cast<Eigen::Index>(dim);
  HiddenNodes nodes;
  nodes.kind = kind;

  if (kind == NodeKind::additive) {
    std::normal_distribution<double> normal(0.0, options.weightScale / std::sqrt(static_cast<double>(dim)));
    std::uniform_real_distribution<double> bias(-1.0, 1.0);
    nodes.weights.resize(ns, nd);
    nodes.biases.resize(ns);
    for (Eigen::Index i = 0; i < ns; ++i) {
      for (Eigen::Index j = 0; j < nd; ++j) nodes.weights(i, j) = normal(rng);
      nodes.biases[i] = bias(rng);
    }
    if (options.standardizeInputs && preview.size() >= 2) {
      // w . (q - mu) / sigma + d  ==  (w / sigma) . q + (d - (w / sigma) . mu)
      Vector mu = Vector::Zero(nd);
      for (const auto& q : preview.points()) mu += q;
      mu /= static_cast<double>(preview.size());
      Vector sd = Vector::Zero(nd);
      for (const auto& q : preview.points()) sd.array() += (q - mu).array().square();
      sd = (sd / static_cast<double>(preview.size())).cwiseSqrt();
      for (Eigen::Index j = 0; j < nd; ++j)
        if (!(sd[j] > 0.0)) sd[j] = 1.0;
      nodes.weights.array().rowwise() /= sd.transpose().array();
      nodes.biases -= nodes.weights * mu;
    }
    return nodes;
  }

  if (preview.empty()) throw Error("rbf nodes need a non-empty training preview for centers");
  const std::size_t n = preview.size();
  std::vector<std::size_t> picks;
  picks.reserve(s);
  if (s <= n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < s; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(idx[i], idx[pick(rng)]);
      picks.push_back(idx[i]);
    }
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t i = 0; i < s; ++i) picks.push_back(pick(rng));
  }
  nodes.centers.resize(ns, nd);
  for (Eigen::Index i = 0; i < ns; ++i) nodes.centers.row(i) = preview.point(picks[static_cast<std::size_t>(i)]).transpose();

  std::vector<ParamVector> sub;
  if (n <= options.widthSubsample) {
    sub = preview.points();
  } else {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < options.widthSubsample; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(idx[i], idx[pick(rng)]);
      sub.push_back(preview.point(idx[i]));
    }
  }
  nodes.widths = Vector::Constant(ns, median_pairwise_distance(sub));
  return nodes;
}

Vector feature_map(const HiddenNodes& nodes, const ParamVector& q) {
  require_dim("feature_map", nodes.dim(), q.size());
  const auto s = static_cast<Eigen::Index>(nodes.size());
  Vector h(s + 1);
  if (nodes.kind == NodeKind::additive) {
    const Vector pre = nodes.weights * q + nodes.biases;
    for (Eigen::Index i = 0; i < s; ++i) h[i] = softplus(pre[i]);
  } else {
    for (Eigen::Index i = 0; i < s; ++i) {
      const double w = nodes.widths[i];
      h[i] = std::exp(-(nodes.centers.row(i).transpose() - q).squaredNorm() / (2.0 * w * w));
    }
  }
  h[s] = 1.0;
  return h;
}

Matrix feature_matrix(const HiddenNodes& nodes, const TrainingSet& data) {
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto s = static_cast<Eigen::Index>(nodes.size());
  Matrix h(n, s + 1);
  if (nodes.kind == NodeKind::additive && n > 0) {
    Matrix q(n, static_cast<Eigen::Index>(nodes.dim()));
    for (Eigen::Index j = 0; j < n; ++j) {
      require_dim("feature_matrix", nodes.dim(), data.point(static_cast<std::size_t>(j)).size());
      q.row(j) = data.point(static_cast<std::size_t>(j)).transpose();
    }
    Matrix pre = q * nodes.weights.transpose();
    pre.rowwise() += nodes.biases.transpose();
    h.leftCols(s) = pre.unaryExpr([](double x) { return softplus(x); });
    h.col(s).setOnes();
    return h;
  }
  for (Eigen::Index j = 0; j < n; ++j) h.row(j) = feature_map(nodes, data.point(static_cast<std::size_t>(j))).transpose();
  return h;
}

double SurrogateModel::eval(const ParamVector& q) const {
  require_dim("SurrogateModel::eval", dim(), q.size());
  if (nodes.kind == NodeKind::additive) {
    const Vector pre = nodes.weights * q + nodes.biases;
    double z = outputBias;
    for (Eigen::Index i = 0; i < pre.size(); ++i) z += outputWeights[i] * softplus(pre[i]);
    return z;
  }
  const Vector h = feature_map(nodes, q);
  return outputWeights.dot(h.head(outputWeights.size())) + outputBias;
}

Vector SurrogateModel::grad(const ParamVector& q) const {
  require_dim("SurrogateModel::grad", dim(), q.size());
  if (nodes.kind == NodeKind::additive) {
    Vector coef = nodes.weights * q + nodes.biases;
    for (Eigen::Index i = 0; i < coef.size(); ++i) coef[i] = outputWeights[i] * sigmoid(coef[i]);
    return nodes.weights.transpose() * coef;
  }
  // d/dq exp(-|q - c|^2 / 2l^2) = exp(...) (c - q) / l^2
  Matrix diff = nodes.centers.rowwise() - q.transpose();
  Vector coef(diff.rows());
  for (Eigen::Index i = 0; i < diff.rows(); ++i) {
    const double w2 = nodes.widths[i] * nodes.widths[i];
    coef[i] = outputWeights[i] * std::exp(-diff.row(i).squaredNorm() / (2.0 * w2)) / w2;
  }
  return diff.transpose() * coef;
}

Vector SurrogateModel::stacked_weights() const {
  Vector w(outputWeights.size() + 1);
  w.head(outputWeights.size()) = outputWeights;
  w[outputWeights.size()] = outputBias;
  return w;
}

void SurrogateModel::set_stacked_weights(const Vector& w) {
  require_dim("SurrogateModel::set_stacked_weights", size() + 1, w.size());
  outputWeights = w.head(w.size() - 1);
  outputBias = w[w.size() - 1];
}

Vector solve_output_weights(const Matrix& features, const Vector& targets, double ridge) {
  require_dim("solve_output_weights targets", features.rows(), targets.size());
  if (ridge < 0.0) throw Error("ridge must be >= 0");
  if (features.rows() == 0) return Vector::Zero(features.cols());
  if (ridge == 0.0) return pseudo_inverse(features) * targets;

  const auto p = features.cols();
  Matrix gram = Matrix::Zero(p, p);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(features.transpose());
  gram.diagonal().array() += ridge;
  const Vector rhs = features.transpose() * targets;
  Eigen::LLT<Matrix, Eigen::Lower> llt(gram);
  if (llt.info() == Eigen::Success) return llt.solve(rhs);
  // Rounding can leave tiny negative pivots when ridge is far below the
  // feature scale; the SVD form of the ridge solution is always defined.
  Eigen::BDCSVD<Matrix> svd(features, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const Vector shrink = sv.array() / (sv.array().square() + ridge);
  return svd.matrixV() * shrink.asDiagonal() * (svd.matrixU().transpose() * targets);
}

SurrogateModel elm_fit(const HiddenNodes& nodes, const TrainingSet& data, double ridge) {
  if (data.empty()) throw DataError("elm_fit needs at least one training point");
  const Matrix h = feature_matrix(nodes, data);
  for (Eigen::Index j = 0; j < h.rows(); ++j) {
    if (!h.row(j).allFinite() || !std::isfinite(data.target(static_cast<std::size_t>(j)))) {
      std::ostringstream msg;
      msg << "elm_fit: training point " << j << " has non-finite features or target";
      throw NumericalError(msg.str());
    }
  }
  SurrogateModel model;
  model.nodes = nodes;
  model.ridge = ridge;
  model.outputWeights = Vector::Zero(static_cast<Eigen::Index>(nodes.size()));
  model.set_stacked_weights(solve_output_weights(h, data.target_vector(), ridge));
  return model;
}

double potential_matching_distance(const SurrogateModel& model, const TrainingSet& data) {
  if (data.size() < 2) throw DataError("potential matching distance needs at least two points");
  Vector r(static_cast<Eigen::Index>(data.size()));
  for (std::size_t n = 0; n < data.size(); ++n)
    r[static_cast<Eigen::Index>(n)] = model.eval(data.point(n)) - data.target(n);
  // min_c mean (r - c)^2 = mean r^2 - (mean r)^2, evaluated in centered form.
  return (r.array() - r.mean()).square().mean();
}

nlohmann::json vector_to_json(const Vector& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector vector_from_json(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_to_json(m.row(i).transpose()));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto r = j.at("rows").get<Eigen::Index>();
  const auto c = j.at("cols").get<Eigen::Index>();
  Matrix m(r, c);
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != r) throw DataError("matrix row count mismatch");
  for (Eigen::Index i = 0; i < r; ++i) {
    const Vector row = vector_from_json(data.at(static_cast<std::size_t>(i)));
    if (row.size() != c) throw DataError("matrix column count mismatch");
    m.row(i) = row.transpose();
  }
  return m;
}

nlohmann::json nodes_to_json(const HiddenNodes& nodes) {
  nlohmann::json j{{"kind", to_string(nodes.kind)}};
  if (nodes.kind == NodeKind::additive) {
    j["weights"] = matrix_to_json(nodes.weights);
    j["biases"] = vector_to_json(nodes.biases);
  } else {
    j["centers"] = matrix_to_json(nodes.centers);
    j["widths"] = vector_to_json(nodes.widths);
  }
  return j;
}

HiddenNodes nodes_from_json(const nlohmann::json& j) {
  HiddenNodes nodes;
  nodes.kind = parse_node_kind(j.at("kind").get<std::string>());
  if (nodes.kind == NodeKind::additive) {
    nodes.weights = matrix_from_json(j.at("weights"));
    nodes.biases = vector_from_json(j.at("biases"));
    require_dim("additive biases", nodes.weights.rows(), nodes.biases.size());
  } else {
    nodes.centers = matrix_from_json(j.at("centers"));
    nodes.widths = vector_from_json(j.at("widths"));
    require_dim("rbf widths", nodes.centers.rows(), nodes.widths.size());
    if (nodes.widths.size() > 0 && !(nodes.widths.minCoeff() > 0.0))
      throw DataError("rbf widths must be strictly positive");
  }
  return nodes;
}

nlohmann::json surrogate_to_json(const SurrogateModel& model) {
  return {{"format", "rnshmc-surrogate"},
          {"version", 1},
          {"kind", to_string(model.nodes.kind)},
          {"s", model.size()},
          {"d", model.dim()},
          {"seed", model.seed},
          {"ridge", model.ridge},
          {"nodes", nodes_to_json(model.nodes)},
          {"weights", vector_to_json(model.outputWeights)},
          {"bias", model.outputBias}};
}

SurrogateModel surrogate_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "rnshmc-surrogate") throw DataError("not a surrogate container");
  if (j.at("version").get<int>() != 1) throw DataError("unsupported surrogate container version");
  SurrogateModel model;
  model.nodes = nodes_from_json(j.at("nodes"));
  model.outputWeights = vector_from_json(j.at("weights"));
  model.outputBias = j.at("bias").get<double>();
  model.ridge = j.at("ridge").get<double>();
  model.seed = j.at("seed").get<std::uint64_t>();
  require_dim("surrogate weights", model.nodes.size(), model.outputWeights.size());
  if (j.at("s").get<std::size_t>() != model.size() || j.at("d").get<std::size_t>() != model.dim())
    throw DataError("surrogate header does not match node parameters");
  return model;
}

}  // namespace rnshmc
