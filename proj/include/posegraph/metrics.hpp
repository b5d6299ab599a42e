#pragma once

#include <cstdint>
#include <vector>

#include "posegraph/graph.hpp"
#include "posegraph/pose_io.hpp"
#include "posegraph/score_matrix.hpp"

namespace posegraph {

// One item of a ranked list over M items. Both rank fields are 1-based and
// must each form a permutation of 1..M; relevance is M - truth_rank.
struct RankedItem {
  int id = 0;
  int truth_rank = 1;
  int predicted_rank = 1;
};

// Sum of (2^relevance - 1) / log2(predicted_rank + 1).
double dcg(const std::vector<RankedItem>& items);

// DCG of the best possible ordering of M items.
double ideal_dcg(int num_items);

// dcg / ideal_dcg, defined as 1 when the ideal is zero (single item).
double ndcg(const std::vector<RankedItem>& items);

// Orders the pairs unmasked in both matrices by each matrix (descending
// score, ties by canonical pair) and emits the induced ranked list.
std::vector<RankedItem> ranked_list_from_matrices(const ScoreMatrix& predicted,
                                                  const ScoreMatrix& truth);

// Per unordered pair of ground-truth-registered cameras: the larger of the
// relative rotation angle and the relative translation direction angle, in
// degrees. Pairs whose estimate is missing registration get infinity.
std::vector<double> pairwise_pose_errors(const PoseSet& estimated,
                                         const PoseSet& ground_truth,
                                         bool rotation_only = false);

// Exact area under the recall-vs-error step curve up to `threshold_deg`,
// normalized to [0, 1].
double auc_from_errors(const std::vector<double>& errors_deg,
                       double threshold_deg);

double relative_pose_auc(const PoseSet& estimated, const PoseSet& ground_truth,
                         double threshold_deg, bool rotation_only = false);

std::vector<double> relative_pose_auc(const PoseSet& estimated,
                                      const PoseSet& ground_truth,
                                      const std::vector<double>& thresholds_deg,
                                      bool rotation_only = false);

struct GraphReport {
  int num_nodes = 0;
  int num_edges = 0;
  int num_components = 0;
  std::int32_t diameter = 0;  // kUnreachable when disconnected
  double mean_degree = 0.0;
};

GraphReport graph_report(const ImageGraph& graph, int threads = 1);

}  // namespace posegraph
