#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "posegraph/graph.hpp"
#include "posegraph/score_matrix.hpp"

namespace posegraph {

struct SelectionConfig {
  int k = 1;                  // number of spanning trees
  double lambda = 0.5;        // modulation weight in [0,1]
  int top_candidates = 5;     // per-image modulation scope
  double rank_threshold = 0.9;
  bool modulation_enabled = true;
  bool distance_normalization_enabled = true;
  // The pruning step runs after each constructed tree, so it gates trees
  // m >= 2 by default; set this to also prune before the first tree.
  bool threshold_first_tree = false;

  void validate() const;
};

struct SelectedEdge {
  int u = 0;  // canonical: u < v
  int v = 0;
  int mst_index = 0;             // 1-based tree iteration
  double score_at_selection = 0.0;
};

struct PoseGraphInit {
  int num_nodes = 0;
  std::vector<SelectedEdge> edges;

  ImageGraph to_graph() const;
};

// Scores after distance modulation for one tree iteration. Previously
// selected edges carry -inf; pairs outside candidacy (masked input entries,
// the diagonal, pruned edges) carry NaN.
struct ModulatedScores {
  int iteration = 0;
  Eigen::MatrixXd values;
};

struct TreeStats {
  int mst_index = 0;
  int edges_added = 0;
  int readmitted = 0;
  std::int32_t union_diameter = kUnreachable;  // after this tree joined the union
};

struct SelectionReport {
  int num_nodes = 0;
  SelectionConfig config;
  std::vector<TreeStats> iterations;
  std::vector<std::string> warnings;
};

struct MultiMstResult {
  PoseGraphInit graph;
  SelectionReport report;
};

// dist / diameter per pair; every entry is 1 when the graph has unreachable
// pairs (infinite diameter), which covers the empty graph before tree one.
Eigen::MatrixXd normalize_distances(const HopDistanceMatrix& distances);

// Applies s = (1 - lambda) * rank + lambda * normalized distance to the
// candidate edges inside each image's top-`top_candidates` by predicted rank;
// other candidates keep their raw rank. Edges in `selected` are masked to
// -inf; edges below the rank threshold leave candidacy when `apply_threshold`.
ModulatedScores modulate_scores(
    const ScoreMatrix& ranks, const Eigen::MatrixXd& normalized_dist,
    const SelectionConfig& config,
    const std::vector<std::pair<int, int>>& selected = {},
    bool apply_threshold = true, int iteration = 1);

// Iterated maximum-score spanning trees on weights 1 - s with edge-disjoint
// masking, distance modulation from the second tree on, and re-admission of
// pruned edges whenever thresholding would disconnect the union.
MultiMstResult build_multi_mst(const ScoreMatrix& ranks,
                               const SelectionConfig& config);

// Baseline: each image connects to its k best-scored partners; the union is
// deduplicated into undirected edges.
std::vector<std::pair<int, int>> knn_select(const ScoreMatrix& ranks, int k);

// One "nameA nameB" line per edge, ordered by (mst_index, canonical pair).
std::string emit_pair_list(const PoseGraphInit& init,
                           const std::vector<std::string>& names);
std::string emit_pair_list(const std::vector<std::pair<int, int>>& edges,
                           const std::vector<std::string>& names);

// Inverse of emit_pair_list over a known image-name manifest.
std::vector<std::pair<int, int>> parse_pair_list(
    const std::string& text, const std::vector<std::string>& names);

}  // namespace posegraph
