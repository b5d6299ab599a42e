#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "posegraph/score_matrix.hpp"
#include "posegraph/tensor_io.hpp"

namespace posegraph {

// One image descriptor; a batch is stored column-per-node in an
// Eigen::MatrixXd so the forward pass stays a handful of matrix products.
using NodeEmbedding = Eigen::VectorXd;

// y = W x + b, W is [out x in].
struct LinearLayer {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;

  int in_dim() const { return static_cast<int>(weight.cols()); }
  int out_dim() const { return static_cast<int>(weight.rows()); }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    return weight * x + bias;
  }
};

// Inference-mode batch normalization over stored running statistics.
struct BatchNormLayer {
  Eigen::VectorXd gamma;
  Eigen::VectorXd beta;
  Eigen::VectorXd running_mean;
  Eigen::VectorXd running_var;
  double eps = 1e-5;

  int dim() const { return static_cast<int>(gamma.size()); }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

// Two-layer MLP: linear -> batch norm -> ReLU -> linear -> batch norm -> ReLU.
struct MlpBlock {
  LinearLayer lin1;
  BatchNormLayer bn1;
  LinearLayer lin2;
  BatchNormLayer bn2;

  int in_dim() const { return lin1.in_dim(); }
  int out_dim() const { return lin2.out_dim(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

// Final rank predictor: linear -> ReLU -> dropout (identity at inference)
// -> linear to a scalar logit.
struct RankHead {
  LinearLayer lin1;
  LinearLayer lin2;
  double dropout_rate = 0.5;

  double apply(const Eigen::VectorXd& x) const;
};

// All learned parameters of the edge-rank predictor. The same blocks are
// applied at both message-passing rounds.
struct GnnWeights {
  LinearLayer edge_init;  // [d_i, d_j, cos(d_i,d_j)] -> initial edge feature
  MlpBlock edge_update;   // [e_ij, d_i, d_j] -> e_ij
  MlpBlock message;       // [e_ij, d_j] -> message to node i
  MlpBlock node_update;   // [d_i, mean message] -> d_i
  RankHead rank_head;     // e_ij after round 2 -> rank logit

  int node_dim() const { return node_update.out_dim(); }
  int edge_dim() const { return edge_init.out_dim(); }
  int message_dim() const { return message.out_dim(); }

  // Checks every concatenation arithmetic; throws FormatError naming the
  // offending block so bad containers fail at load time, not mid-inference.
  void validate() const;

  TensorFile to_tensor_file() const;
  static GnnWeights from_tensor_file(const TensorFile& file);

  static GnnWeights random(int node_dim, int edge_dim, std::uint64_t seed);
};

GnnWeights load_gnn_weights(const std::filesystem::path& path);
void save_gnn_weights(const std::filesystem::path& path, const GnnWeights& w);

// Plain cosine similarity; throws on dimension mismatch or a zero-norm input.
double cosine_similarity(const NodeEmbedding& a, const NodeEmbedding& b);

// Index of directed pair (i,j), i != j, into a [0, N*(N-1)) range.
inline int directed_pair_index(int i, int j, int num_nodes) {
  return i * (num_nodes - 1) + (j > i ? j - 1 : j);
}

// Initial edge features for every directed pair, one column per pair in
// directed_pair_index order. Zero-norm embeddings contribute similarity 0.
Eigen::MatrixXd init_edge_features(const Eigen::MatrixXd& embeddings,
                                   const GnnWeights& weights);

struct MessagePassResult {
  Eigen::MatrixXd edge_features;   // column per directed pair
  Eigen::MatrixXd node_embeddings; // column per node
};

// One edge->message->node round over the complete graph. Messages are summed
// in ascending neighbor order and divided by the full node count N.
MessagePassResult message_pass_round(const Eigen::MatrixXd& node_embeddings,
                                     const Eigen::MatrixXd& edge_features,
                                     const GnnWeights& weights,
                                     int round_index);

// Full forward pass: init, two message-passing rounds, rank head with
// logistic squashing, then symmetrization of the two directed predictions.
ScoreMatrix predict_edge_ranks(const Eigen::MatrixXd& embeddings,
                               const GnnWeights& weights);

ScoreMatrix predict_edge_ranks(const std::vector<NodeEmbedding>& embeddings,
                               const GnnWeights& weights);

}  // namespace posegraph
