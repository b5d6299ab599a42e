#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "posegraph/graph.hpp"
#include "posegraph/score_matrix.hpp"

namespace posegraph {

struct Partition {
  int num_clusters = 1;
  std::vector<int> assignment;                      // node -> cluster id
  std::vector<std::vector<int>> members;            // sorted base sets
  std::vector<std::vector<int>> expanded_members;   // base sets until expanded

  int num_nodes() const { return static_cast<int>(assignment.size()); }
};

// 1 + floor(n / n_max) clusters, except that graphs at or below
// `bypass_threshold` nodes are processed as a single group.
int num_clusters(int n, int n_max, int bypass_threshold = 500);

struct PartitionConfig {
  double imbalance = 1.2;
  int restarts = 8;
  std::uint64_t seed = 0;

  void validate() const;
};

// Balanced partition minimizing the similarity cut: seeded dissimilar-pair
// growth plus randomized restarts, refined by single-node moves under the
// balance cap, recursive bisection for more than two clusters. Deterministic
// given the seed. Masked similarity entries count as zero affinity.
Partition partition_graph(const ScoreMatrix& similarity, int n_clusters,
                          const PartitionConfig& config = {});

// Sum of similarity over pairs whose endpoints lie in different clusters.
double cut_similarity(const ScoreMatrix& similarity,
                      const std::vector<int>& assignment);

// Undirected union of each node's top-k partners by similarity; the
// candidate graph that 1-hop expansion walks.
ImageGraph build_knn_graph(const ScoreMatrix& similarity, int k);

// Grows every cluster by the neighbors of its members in the candidate
// graph; base sets are untouched.
Partition expand_one_hop(const Partition& partition, const ImageGraph& graph);

struct ScoreFragment {
  std::vector<int> node_ids;  // global ids, fragment-local order
  ScoreMatrix scores;         // fragment-local indexing
};

struct MergedPrediction {
  ScoreMatrix scores;
  Eigen::MatrixXi contributions;
};

// Arithmetic mean over all fragments covering a pair; pairs no fragment
// covers stay masked.
MergedPrediction merge_predictions(const std::vector<ScoreFragment>& fragments,
                                   int num_nodes);

}  // namespace posegraph
