#include "posegraph/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace posegraph {

namespace {

constexpr double kRadToDeg = 180.0 / M_PI;

void check_permutations(const std::vector<RankedItem>& items) {
  const int m = static_cast<int>(items.size());
  std::vector<char> seen_truth(m + 1, 0), seen_pred(m + 1, 0);
  for (const RankedItem& item : items) {
    if (item.truth_rank < 1 || item.truth_rank > m ||
        seen_truth[item.truth_rank]) {
      throw std::invalid_argument("dcg: truth ranks are not a permutation");
    }
    if (item.predicted_rank < 1 || item.predicted_rank > m ||
        seen_pred[item.predicted_rank]) {
      throw std::invalid_argument(
          "dcg: predicted ranks are not a permutation");
    }
    seen_truth[item.truth_rank] = 1;
    seen_pred[item.predicted_rank] = 1;
  }
}

// Positions of pairs ordered by descending score, ties by canonical pair.
std::vector<int> rank_positions(const ScoreMatrix& matrix,
                                const std::vector<std::pair<int, int>>& pairs) {
  std::vector<int> order(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double sa = matrix.at(pairs[a].first, pairs[a].second);
    const double sb = matrix.at(pairs[b].first, pairs[b].second);
    if (sa != sb) return sa > sb;
    return pairs[a] < pairs[b];
  });
  std::vector<int> position(pairs.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    position[order[r]] = static_cast<int>(r) + 1;
  }
  return position;
}

// atan2 formulations stay exact at zero: identical inputs cancel bitwise
// instead of hitting the flat top of acos.
double angle_between_deg(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  constexpr double kEps = 1e-12;
  const double na = a.norm();
  const double nb = b.norm();
  if (na < kEps && nb < kEps) return 0.0;
  if (na < kEps || nb < kEps) return 180.0;
  return std::atan2(a.cross(b).norm(), a.dot(b)) * kRadToDeg;
}

double rotation_angle_deg(const Eigen::Quaterniond& q) {
  return 2.0 * std::atan2(q.vec().norm(), std::abs(q.w())) * kRadToDeg;
}

}  // namespace

double dcg(const std::vector<RankedItem>& items) {
  check_permutations(items);
  const int m = static_cast<int>(items.size());
  double total = 0.0;
  for (const RankedItem& item : items) {
    const double relevance = static_cast<double>(m - item.truth_rank);
    total += (std::exp2(relevance) - 1.0) /
             std::log2(static_cast<double>(item.predicted_rank) + 1.0);
  }
  return total;
}

double ideal_dcg(int num_items) {
  double total = 0.0;
  for (int p = 1; p <= num_items; ++p) {
    const double relevance = static_cast<double>(num_items - p);
    total += (std::exp2(relevance) - 1.0) /
             std::log2(static_cast<double>(p) + 1.0);
  }
  return total;
}

double ndcg(const std::vector<RankedItem>& items) {
  const double ideal = ideal_dcg(static_cast<int>(items.size()));
  if (ideal == 0.0) return 1.0;
  return dcg(items) / ideal;
}

std::vector<RankedItem> ranked_list_from_matrices(const ScoreMatrix& predicted,
                                                  const ScoreMatrix& truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument(
        "ranked_list_from_matrices: matrix sizes differ");
  }
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < truth.size(); ++i) {
    for (int j = i + 1; j < truth.size(); ++j) {
      if (!predicted.masked(i, j) && !truth.masked(i, j)) {
        pairs.emplace_back(i, j);
      }
    }
  }
  const std::vector<int> truth_pos = rank_positions(truth, pairs);
  const std::vector<int> pred_pos = rank_positions(predicted, pairs);
  std::vector<RankedItem> items(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    items[i] = {static_cast<int>(i), truth_pos[i], pred_pos[i]};
  }
  return items;
}

std::vector<double> pairwise_pose_errors(const PoseSet& estimated,
                                         const PoseSet& ground_truth,
                                         bool rotation_only) {
  std::unordered_map<std::string, const PoseRecord*> by_name;
  for (const PoseRecord& pose : estimated) {
    if (!by_name.emplace(pose.name, &pose).second) {
      throw std::invalid_argument("pairwise_pose_errors: duplicate camera " +
                                  pose.name);
    }
  }
  if (by_name.size() != ground_truth.size()) {
    throw std::invalid_argument(
        "pairwise_pose_errors: camera manifests differ");
  }
  std::vector<const PoseRecord*> gt_registered;
  std::vector<const PoseRecord*> est_matched;
  for (const PoseRecord& gt : ground_truth) {
    const auto it = by_name.find(gt.name);
    if (it == by_name.end()) {
      throw std::invalid_argument(
          "pairwise_pose_errors: camera missing from estimate: " + gt.name);
    }
    if (gt.registered) {
      gt_registered.push_back(&gt);
      est_matched.push_back(it->second);
    }
  }
  const int n = static_cast<int>(gt_registered.size());
  if (n < 2) {
    throw std::invalid_argument(
        "pairwise_pose_errors: need at least 2 registered ground-truth "
        "cameras");
  }

  std::vector<double> errors;
  errors.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!est_matched[i]->registered || !est_matched[j]->registered) {
        errors.push_back(std::numeric_limits<double>::infinity());
        continue;
      }
      const Eigen::Quaterniond rel_gt =
          gt_registered[i]->rotation.normalized() *
          gt_registered[j]->rotation.normalized().conjugate();
      const Eigen::Quaterniond rel_est =
          est_matched[i]->rotation.normalized() *
          est_matched[j]->rotation.normalized().conjugate();
      double error = rotation_angle_deg(rel_est * rel_gt.conjugate());
      if (!rotation_only) {
        const Eigen::Vector3d t_gt =
            gt_registered[i]->translation -
            rel_gt * gt_registered[j]->translation;
        const Eigen::Vector3d t_est =
            est_matched[i]->translation -
            rel_est * est_matched[j]->translation;
        error = std::max(error, angle_between_deg(t_est, t_gt));
      }
      errors.push_back(error);
    }
  }
  return errors;
}

double auc_from_errors(const std::vector<double>& errors_deg,
                       double threshold_deg) {
  if (errors_deg.empty()) {
    throw std::invalid_argument("auc_from_errors: no errors");
  }
  if (!(threshold_deg > 0.0)) {
    throw std::invalid_argument("auc_from_errors: threshold must be > 0");
  }
  double area = 0.0;
  for (const double e : errors_deg) {
    if (e <= threshold_deg) {
      area += (threshold_deg - e) / threshold_deg;
    }
  }
  return area / static_cast<double>(errors_deg.size());
}

double relative_pose_auc(const PoseSet& estimated, const PoseSet& ground_truth,
                         double threshold_deg, bool rotation_only) {
  return auc_from_errors(
      pairwise_pose_errors(estimated, ground_truth, rotation_only),
      threshold_deg);
}

std::vector<double> relative_pose_auc(const PoseSet& estimated,
                                      const PoseSet& ground_truth,
                                      const std::vector<double>& thresholds_deg,
                                      bool rotation_only) {
  const std::vector<double> errors =
      pairwise_pose_errors(estimated, ground_truth, rotation_only);
  std::vector<double> aucs;
  aucs.reserve(thresholds_deg.size());
  for (const double t : thresholds_deg) {
    aucs.push_back(auc_from_errors(errors, t));
  }
  return aucs;
}

GraphReport graph_report(const ImageGraph& graph, int threads) {
  GraphReport report;
  report.num_nodes = graph.num_nodes();
  report.num_edges = static_cast<int>(graph.edges().size());
  report.num_components = count_components(graph);
  report.diameter = graph_diameter(all_pairs_hop_distances(graph, threads));
  report.mean_degree =
      report.num_nodes > 0
          ? 2.0 * report.num_edges / static_cast<double>(report.num_nodes)
          : 0.0;
  return report;
}

}  // namespace posegraph
