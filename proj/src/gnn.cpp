#include "posegraph/gnn.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "posegraph/error.hpp"

namespace posegraph {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_dims(bool ok, const std::string& what) {
  if (!ok) throw FormatError("weight shape mismatch: " + what);
}

Eigen::VectorXd relu(Eigen::VectorXd x) {
  return x.cwiseMax(0.0);
}

std::vector<float> to_float(const Eigen::MatrixXd& m) {
  std::vector<float> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out.push_back(static_cast<float>(m(r, c)));
    }
  }
  return out;
}

Eigen::MatrixXd matrix_from_tensor(const Tensor& t) {
  if (t.shape.size() != 2) {
    throw FormatError("tensor is not a matrix: " + t.name);
  }
  Eigen::MatrixXd m(t.shape[0], t.shape[1]);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = t.data[k++];
    }
  }
  return m;
}

Eigen::VectorXd vector_from_tensor(const Tensor& t) {
  if (t.shape.size() != 1) {
    throw FormatError("tensor is not a vector: " + t.name);
  }
  Eigen::VectorXd v(t.shape[0]);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = t.data[i];
  return v;
}

void add_linear(TensorFile* file, const std::string& prefix,
                const LinearLayer& layer) {
  file->add(prefix + ".weight", {layer.weight.rows(), layer.weight.cols()},
            to_float(layer.weight));
  file->add(prefix + ".bias", {layer.bias.size()}, to_float(layer.bias));
}

void add_batch_norm(TensorFile* file, const std::string& prefix,
                    const BatchNormLayer& bn) {
  file->add(prefix + ".gamma", {bn.gamma.size()}, to_float(bn.gamma));
  file->add(prefix + ".beta", {bn.beta.size()}, to_float(bn.beta));
  file->add(prefix + ".mean", {bn.running_mean.size()},
            to_float(bn.running_mean));
  file->add(prefix + ".var", {bn.running_var.size()},
            to_float(bn.running_var));
}

void add_mlp(TensorFile* file, const std::string& prefix,
             const MlpBlock& mlp) {
  add_linear(file, prefix + ".lin1", mlp.lin1);
  add_batch_norm(file, prefix + ".bn1", mlp.bn1);
  add_linear(file, prefix + ".lin2", mlp.lin2);
  add_batch_norm(file, prefix + ".bn2", mlp.bn2);
}

LinearLayer linear_from(const TensorFile& file, const std::string& prefix) {
  LinearLayer layer;
  layer.weight = matrix_from_tensor(file.require(prefix + ".weight"));
  layer.bias = vector_from_tensor(file.require(prefix + ".bias"));
  if (layer.bias.size() != layer.weight.rows()) {
    throw FormatError("weight shape mismatch: " + prefix + ".bias");
  }
  return layer;
}

BatchNormLayer batch_norm_from(const TensorFile& file,
                               const std::string& prefix) {
  BatchNormLayer bn;
  bn.gamma = vector_from_tensor(file.require(prefix + ".gamma"));
  bn.beta = vector_from_tensor(file.require(prefix + ".beta"));
  bn.running_mean = vector_from_tensor(file.require(prefix + ".mean"));
  bn.running_var = vector_from_tensor(file.require(prefix + ".var"));
  if (bn.beta.size() != bn.gamma.size() ||
      bn.running_mean.size() != bn.gamma.size() ||
      bn.running_var.size() != bn.gamma.size()) {
    throw FormatError("weight shape mismatch: " + prefix);
  }
  return bn;
}

MlpBlock mlp_from(const TensorFile& file, const std::string& prefix) {
  MlpBlock mlp;
  mlp.lin1 = linear_from(file, prefix + ".lin1");
  mlp.bn1 = batch_norm_from(file, prefix + ".bn1");
  mlp.lin2 = linear_from(file, prefix + ".lin2");
  mlp.bn2 = batch_norm_from(file, prefix + ".bn2");
  if (mlp.bn1.dim() != mlp.lin1.out_dim() ||
      mlp.lin2.in_dim() != mlp.lin1.out_dim() ||
      mlp.bn2.dim() != mlp.lin2.out_dim()) {
    throw FormatError("weight shape mismatch: " + prefix);
  }
  return mlp;
}

LinearLayer random_linear(int out, int in, std::mt19937_64* rng) {
  const double bound = std::sqrt(6.0 / (in + out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  LinearLayer layer;
  layer.weight.resize(out, in);
  for (Eigen::Index r = 0; r < out; ++r) {
    for (Eigen::Index c = 0; c < in; ++c) layer.weight(r, c) = dist(*rng);
  }
  layer.bias.resize(out);
  for (Eigen::Index r = 0; r < out; ++r) layer.bias[r] = 0.1 * dist(*rng);
  return layer;
}

BatchNormLayer random_batch_norm(int dim, std::mt19937_64* rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  BatchNormLayer bn;
  bn.gamma.resize(dim);
  bn.beta.resize(dim);
  bn.running_mean.resize(dim);
  bn.running_var.resize(dim);
  for (int i = 0; i < dim; ++i) {
    bn.gamma[i] = 0.5 + unit(*rng);
    bn.beta[i] = 0.4 * (unit(*rng) - 0.5);
    bn.running_mean[i] = 0.5 * (unit(*rng) - 0.5);
    bn.running_var[i] = 0.5 + unit(*rng);
  }
  return bn;
}

MlpBlock random_mlp(int out, int in, std::mt19937_64* rng) {
  MlpBlock mlp;
  mlp.lin1 = random_linear(out, in, rng);
  mlp.bn1 = random_batch_norm(out, rng);
  mlp.lin2 = random_linear(out, out, rng);
  mlp.bn2 = random_batch_norm(out, rng);
  return mlp;
}

}  // namespace

Eigen::VectorXd BatchNormLayer::apply(const Eigen::VectorXd& x) const {
  return (gamma.array() * (x - running_mean).array() /
          (running_var.array() + eps).sqrt()) +
         beta.array();
}

Eigen::VectorXd MlpBlock::apply(const Eigen::VectorXd& x) const {
  return relu(bn2.apply(lin2.apply(relu(bn1.apply(lin1.apply(x))))));
}

double RankHead::apply(const Eigen::VectorXd& x) const {
  // Dropout is inactive at inference.
  return lin2.apply(relu(lin1.apply(x)))[0];
}

void GnnWeights::validate() const {
  const int d = node_dim();
  const int d_e = edge_dim();
  check_dims(edge_init.in_dim() == 2 * d + 1, "edge_init expects 2d+1 inputs");
  check_dims(edge_update.in_dim() == d_e + 2 * d,
             "edge_update expects edge_dim + 2d inputs");
  check_dims(edge_update.out_dim() == d_e,
             "edge_update must preserve the edge dimension");
  check_dims(message.in_dim() == d_e + d,
             "message expects edge_dim + d inputs");
  check_dims(node_update.in_dim() == d + message_dim(),
             "node_update expects d + message_dim inputs");
  check_dims(rank_head.lin1.in_dim() == d_e,
             "rank_head expects edge_dim inputs");
  check_dims(rank_head.lin2.in_dim() == rank_head.lin1.out_dim(),
             "rank_head layer dimensions disagree");
  check_dims(rank_head.lin2.out_dim() == 1, "rank_head must emit a scalar");
}

TensorFile GnnWeights::to_tensor_file() const {
  TensorFile file;
  file.meta.emplace_back("rank_head.dropout",
                         std::to_string(rank_head.dropout_rate));
  add_linear(&file, "edge_init", edge_init);
  add_mlp(&file, "edge_update", edge_update);
  add_mlp(&file, "message", message);
  add_mlp(&file, "node_update", node_update);
  add_linear(&file, "rank_head.lin1", rank_head.lin1);
  add_linear(&file, "rank_head.lin2", rank_head.lin2);
  return file;
}

GnnWeights GnnWeights::from_tensor_file(const TensorFile& file) {
  GnnWeights w;
  w.edge_init = linear_from(file, "edge_init");
  w.edge_update = mlp_from(file, "edge_update");
  w.message = mlp_from(file, "message");
  w.node_update = mlp_from(file, "node_update");
  w.rank_head.lin1 = linear_from(file, "rank_head.lin1");
  w.rank_head.lin2 = linear_from(file, "rank_head.lin2");
  for (const auto& [key, value] : file.meta) {
    if (key == "rank_head.dropout") w.rank_head.dropout_rate = std::stod(value);
  }
  w.validate();
  return w;
}

GnnWeights GnnWeights::random(int node_dim, int edge_dim, std::uint64_t seed) {
  if (node_dim < 1 || edge_dim < 1) {
    throw std::invalid_argument("GnnWeights::random: dimensions must be >= 1");
  }
  std::mt19937_64 rng(seed);
  GnnWeights w;
  w.edge_init = random_linear(edge_dim, 2 * node_dim + 1, &rng);
  w.edge_update = random_mlp(edge_dim, edge_dim + 2 * node_dim, &rng);
  w.message = random_mlp(node_dim, edge_dim + node_dim, &rng);
  w.node_update = random_mlp(node_dim, 2 * node_dim, &rng);
  w.rank_head.lin1 = random_linear(edge_dim, edge_dim, &rng);
  w.rank_head.lin2 = random_linear(1, edge_dim, &rng);
  w.validate();
  return w;
}

GnnWeights load_gnn_weights(const std::filesystem::path& path) {
  return GnnWeights::from_tensor_file(read_tensor_file(path));
}

void save_gnn_weights(const std::filesystem::path& path, const GnnWeights& w) {
  write_tensor_file(path, w.to_tensor_file());
}

double cosine_similarity(const NodeEmbedding& a, const NodeEmbedding& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine_similarity: dimension mismatch");
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    throw std::invalid_argument("cosine_similarity: zero-norm embedding");
  }
  return a.dot(b) / (na * nb);
}

Eigen::MatrixXd init_edge_features(const Eigen::MatrixXd& embeddings,
                                   const GnnWeights& weights) {
  const int n = static_cast<int>(embeddings.cols());
  const int d = static_cast<int>(embeddings.rows());
  if (weights.edge_init.in_dim() != 2 * d + 1) {
    throw FormatError("weight shape mismatch: edge_init expects embeddings of"
                      " dimension " +
                      std::to_string((weights.edge_init.in_dim() - 1) / 2));
  }

  Eigen::VectorXd norms(n);
  for (int i = 0; i < n; ++i) norms[i] = embeddings.col(i).norm();

  Eigen::MatrixXd features(weights.edge_dim(), n * (n - 1));
  Eigen::VectorXd input(2 * d + 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      input.head(d) = embeddings.col(i);
      input.segment(d, d) = embeddings.col(j);
      // Zero-norm descriptors carry no direction; their similarity enters as 0.
      input[2 * d] = (norms[i] == 0.0 || norms[j] == 0.0)
                         ? 0.0
                         : embeddings.col(i).dot(embeddings.col(j)) /
                               (norms[i] * norms[j]);
      features.col(directed_pair_index(i, j, n)) =
          relu(weights.edge_init.apply(input));
    }
  }
  return features;
}

MessagePassResult message_pass_round(const Eigen::MatrixXd& node_embeddings,
                                     const Eigen::MatrixXd& edge_features,
                                     const GnnWeights& weights,
                                     int round_index) {
  if (round_index != 1 && round_index != 2) {
    throw std::invalid_argument("message_pass_round: round_index must be 1 or 2");
  }
  const int n = static_cast<int>(node_embeddings.cols());
  const int d = static_cast<int>(node_embeddings.rows());
  if (d != weights.node_dim()) {
    throw FormatError("weight shape mismatch: node embeddings have dimension " +
                      std::to_string(d) + ", weights expect " +
                      std::to_string(weights.node_dim()));
  }
  if (edge_features.rows() != weights.edge_dim() ||
      edge_features.cols() != static_cast<Eigen::Index>(n) * (n - 1)) {
    throw FormatError("weight shape mismatch: edge feature block");
  }

  MessagePassResult result;
  result.edge_features.resize(weights.edge_dim(), edge_features.cols());

  Eigen::VectorXd edge_input(weights.edge_update.in_dim());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const int idx = directed_pair_index(i, j, n);
      edge_input.head(weights.edge_dim()) = edge_features.col(idx);
      edge_input.segment(weights.edge_dim(), d) = node_embeddings.col(i);
      edge_input.tail(d) = node_embeddings.col(j);
      result.edge_features.col(idx) = weights.edge_update.apply(edge_input);
    }
  }

  // Mean message into each node. The sum runs over the N-1 incoming
  // neighbors in ascending order but is divided by the full node count N.
  result.node_embeddings.resize(d, n);
  Eigen::VectorXd message_input(weights.message.in_dim());
  Eigen::VectorXd update_input(weights.node_update.in_dim());
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(weights.message_dim());
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      message_input.head(weights.edge_dim()) =
          result.edge_features.col(directed_pair_index(i, j, n));
      message_input.tail(d) = node_embeddings.col(j);
      sum += weights.message.apply(message_input);
    }
    update_input.head(d) = node_embeddings.col(i);
    update_input.tail(weights.message_dim()) = sum / static_cast<double>(n);
    result.node_embeddings.col(i) = weights.node_update.apply(update_input);
  }
  return result;
}

ScoreMatrix predict_edge_ranks(const Eigen::MatrixXd& embeddings,
                               const GnnWeights& weights) {
  const int n = static_cast<int>(embeddings.cols());
  if (n < 2) {
    throw std::invalid_argument("predict_edge_ranks: need at least 2 nodes");
  }
  weights.validate();

  Eigen::MatrixXd edge_features = init_edge_features(embeddings, weights);
  Eigen::MatrixXd nodes = embeddings;
  for (int round = 1; round <= 2; ++round) {
    MessagePassResult next =
        message_pass_round(nodes, edge_features, weights, round);
    edge_features = std::move(next.edge_features);
    nodes = std::move(next.node_embeddings);
  }

  ScoreMatrix ranks(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double forward = logistic(
          weights.rank_head.apply(edge_features.col(directed_pair_index(i, j, n))));
      const double backward = logistic(
          weights.rank_head.apply(edge_features.col(directed_pair_index(j, i, n))));
      ranks.set(i, j, 0.5 * (forward + backward));
    }
  }
  return ranks;
}

ScoreMatrix predict_edge_ranks(const std::vector<NodeEmbedding>& embeddings,
                               const GnnWeights& weights) {
  if (embeddings.size() < 2) {
    throw std::invalid_argument("predict_edge_ranks: need at least 2 nodes");
  }
  const Eigen::Index d = embeddings.front().size();
  Eigen::MatrixXd m(d, static_cast<Eigen::Index>(embeddings.size()));
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    if (embeddings[i].size() != d) {
      throw std::invalid_argument(
          "predict_edge_ranks: inconsistent embedding dimensions");
    }
    m.col(static_cast<Eigen::Index>(i)) = embeddings[i];
  }
  return predict_edge_ranks(m, weights);
}

}  // namespace posegraph
