#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "posegraph/clustering.hpp"
#include "posegraph/metrics.hpp"
#include "posegraph/selection.hpp"
#include "posegraph/synthetic.hpp"

namespace posegraph {

// File-level drivers behind the CLI subcommands. Each reads and writes the
// formats documented in the io headers, returns a summary for reporting, and
// never touches process exit codes.

struct RankOptions {
  std::filesystem::path embeddings_path;
  std::filesystem::path weights_path;
  std::filesystem::path output_path;
  std::filesystem::path report_path;  // empty: no report written
  int n_max = 500;
  int bypass_threshold = 500;
  int expansion_knn = 10;
  PartitionConfig partition;
  int threads = 1;
};

struct RankSummary {
  int num_images = 0;
  int clusters = 1;
  int covered_pairs = 0;
  int masked_pairs = 0;
};

RankSummary run_rank(const RankOptions& options);

struct SelectOptions {
  std::filesystem::path matrix_path;
  std::filesystem::path pairs_path;
  std::filesystem::path report_path;  // empty: no report written
  SelectionConfig config;
  bool knn_baseline = false;
  int knn_k = 1;
  int threads = 1;
};

struct SelectSummary {
  SelectionReport selection;  // empty iterations for the kNN baseline
  GraphReport graph;
  int num_pairs = 0;
};

SelectSummary run_select(const SelectOptions& options);

struct OracleOptions {
  SceneLayout layout = SceneLayout::kRing;
  std::uint64_t seed = 0;
  int num_cameras = 12;
  int num_points = 600;
  NoiseConfig noise;
  NormalizeConfig normalize;
  int min_inliers = 15;  // 0 disables the export filter
  std::filesystem::path output_path;
  std::filesystem::path poses_path;   // empty: no pose dump
  std::filesystem::path report_path;  // empty: no report written
};

struct OracleSummary {
  int num_cameras = 0;
  int num_points = 0;
  int masked_pairs = 0;
};

OracleSummary run_oracle(const OracleOptions& options);

struct RankingEvalSummary {
  int num_pairs = 0;
  double dcg_value = 0.0;
  double ideal = 0.0;
  double ndcg_value = 1.0;
  bool zero_ideal = false;
};

RankingEvalSummary evaluate_ranking(const std::filesystem::path& predicted,
                                    const std::filesystem::path& truth,
                                    const std::filesystem::path& report_path);

struct PairsEvalSummary {
  GraphReport graph;
};

PairsEvalSummary evaluate_pairs(const std::filesystem::path& pairs,
                                const std::filesystem::path& matrix,
                                const std::filesystem::path& report_path,
                                int threads);

struct PoseEvalSummary {
  int num_pairs = 0;
  int unregistered_pairs = 0;
  // threshold (degrees) -> auc
  std::vector<std::pair<double, double>> auc;
};

PoseEvalSummary evaluate_poses(const std::filesystem::path& estimated,
                               const std::filesystem::path& ground_truth,
                               const std::vector<double>& thresholds_deg,
                               bool rotation_only,
                               const std::filesystem::path& report_path);

struct ClusterOptions {
  std::filesystem::path matrix_path;
  std::filesystem::path report_path;
  int n_clusters = 0;  // 0: derive from n_max
  int n_max = 500;
  int bypass_threshold = 500;
  int expansion_knn = 10;
  PartitionConfig partition;
};

struct ClusterSummary {
  Partition partition;
  double cut = 0.0;
};

ClusterSummary run_cluster(const ClusterOptions& options);

}  // namespace posegraph
