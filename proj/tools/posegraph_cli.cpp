#include <cstdio>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "posegraph/pipeline.hpp"

namespace {

int default_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

void print_graph(const posegraph::GraphReport& graph) {
  std::printf("graph: %d nodes, %d edges, %d components, mean degree %.3f\n",
              graph.num_nodes, graph.num_edges, graph.num_components,
              graph.mean_degree);
  if (graph.diameter == posegraph::kUnreachable) {
    std::printf("diameter: unreachable (disconnected)\n");
  } else {
    std::printf("diameter: %d\n", graph.diameter);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pose-graph construction toolkit: edge-rank prediction, "
               "multi-MST selection, synthetic supervision, evaluation"};
  app.require_subcommand(1);
  int threads = default_threads();
  app.add_option("--threads", threads, "Worker threads for graph statistics")
      ->check(CLI::PositiveNumber);

  posegraph::RankOptions rank;
  CLI::App* cmd_rank =
      app.add_subcommand("rank", "Predict edge ranks from image embeddings");
  cmd_rank->add_option("--embeddings", rank.embeddings_path,
                       "Embedding container (pgtensors)")
      ->required();
  cmd_rank->add_option("--weights", rank.weights_path,
                       "Model weight container (pgtensors)")
      ->required();
  cmd_rank->add_option("--output", rank.output_path,
                       "Output score matrix (pgmatrix)")
      ->required();
  cmd_rank->add_option("--report", rank.report_path, "JSON run report");
  cmd_rank->add_option("--n-max", rank.n_max,
                       "Maximum images ranked in one group");
  cmd_rank->add_option("--bypass", rank.bypass_threshold,
                       "Skip clustering at or below this many images");
  cmd_rank->add_option("--expansion-knn", rank.expansion_knn,
                       "Neighbors per node in the expansion graph");
  cmd_rank->add_option("--imbalance", rank.partition.imbalance,
                       "Cluster balance factor");
  cmd_rank->add_option("--restarts", rank.partition.restarts,
                       "Partitioner restarts");
  cmd_rank->add_option("--seed", rank.partition.seed, "Partitioner seed");

  posegraph::SelectOptions select;
  std::string baseline;
  CLI::App* cmd_select = app.add_subcommand(
      "select", "Build the initial pose graph from a score matrix");
  cmd_select->add_option("--matrix", select.matrix_path,
                         "Score matrix (pgmatrix)")
      ->required();
  cmd_select->add_option("--output", select.pairs_path, "Output pair list")
      ->required();
  cmd_select->add_option("--report", select.report_path, "JSON run report");
  cmd_select->add_option("--k", select.config.k,
                         "Spanning trees (or kNN degree with --baseline knn)");
  cmd_select->add_option("--lambda", select.config.lambda,
                         "Distance modulation weight in [0,1]");
  cmd_select->add_option("--top-candidates", select.config.top_candidates,
                         "Modulated edges per image");
  cmd_select->add_option("--rank-threshold", select.config.rank_threshold,
                         "Discard candidates below this rank (0 disables)");
  cmd_select->add_flag_callback(
      "--no-modulation",
      [&select]() { select.config.modulation_enabled = false; },
      "Disable distance modulation");
  cmd_select->add_flag_callback(
      "--no-distance-normalization",
      [&select]() { select.config.distance_normalization_enabled = false; },
      "Use raw hop counts instead of diameter-normalized distances");
  cmd_select->add_flag(
      "--threshold-first-tree", select.config.threshold_first_tree,
      "Apply the rank threshold to the first tree as well");
  cmd_select->add_option("--baseline", baseline,
                         "Selection baseline (knn)")
      ->check(CLI::IsMember({"knn"}));

  posegraph::OracleOptions oracle;
  std::string layout = "ring";
  CLI::App* cmd_oracle = app.add_subcommand(
      "oracle", "Generate ground-truth edge ranks from a synthetic scene");
  cmd_oracle->add_option("--layout", layout, "ring, corridor or two-cluster");
  cmd_oracle->add_option("--output", oracle.output_path,
                         "Output score matrix (pgmatrix)")
      ->required();
  cmd_oracle->add_option("--poses", oracle.poses_path,
                         "Also write the ground-truth camera poses");
  cmd_oracle->add_option("--report", oracle.report_path, "JSON run report");
  cmd_oracle->add_option("--seed", oracle.seed, "Scene seed");
  cmd_oracle->add_option("--cameras", oracle.num_cameras, "Camera count");
  cmd_oracle->add_option("--points", oracle.num_points, "3D point count");
  cmd_oracle->add_option("--outlier-rate", oracle.noise.outlier_rate,
                         "Simulated outlier fraction in [0,1)");
  cmd_oracle->add_option("--detection-rate", oracle.noise.detection_rate,
                         "Simulated detection fraction in [0,1]");
  cmd_oracle->add_option("--jitter", oracle.noise.jitter,
                         "Relative inlier-count jitter");
  cmd_oracle->add_option("--noise-seed", oracle.noise.seed,
                         "Seed for the inlier jitter");
  cmd_oracle->add_option("--breakpoint", oracle.normalize.breakpoint,
                         "Count mapped to low_fraction");
  cmd_oracle->add_option("--low-fraction", oracle.normalize.low_fraction,
                         "Normalized value at the breakpoint");
  cmd_oracle->add_option("--cap", oracle.normalize.cap,
                         "Count mapped to 1.0");
  cmd_oracle->add_option("--min-inliers", oracle.min_inliers,
                         "Mask pairs below this inlier count (0 disables)");

  CLI::App* cmd_evaluate =
      app.add_subcommand("evaluate", "Score predictions and reconstructions");
  cmd_evaluate->require_subcommand(1);

  std::string eval_predicted, eval_truth, eval_report;
  CLI::App* eval_ranking = cmd_evaluate->add_subcommand(
      "ranking", "NDCG of a predicted matrix against ground truth");
  eval_ranking->add_option("--predicted", eval_predicted, "Predicted matrix")
      ->required();
  eval_ranking->add_option("--truth", eval_truth, "Ground-truth matrix")
      ->required();
  eval_ranking->add_option("--report", eval_report, "JSON report");

  std::string pairs_path, pairs_matrix, pairs_report;
  CLI::App* eval_pairs = cmd_evaluate->add_subcommand(
      "pairs", "Connectivity statistics of a pair list");
  eval_pairs->add_option("--pairs", pairs_path, "Pair list")->required();
  eval_pairs
      ->add_option("--matrix", pairs_matrix,
                   "Score matrix providing the image manifest")
      ->required();
  eval_pairs->add_option("--report", pairs_report, "JSON report");

  std::string poses_estimated, poses_truth, poses_report;
  std::vector<double> thresholds{2.5, 5.0};
  bool rotation_only = false;
  CLI::App* eval_poses = cmd_evaluate->add_subcommand(
      "poses", "Relative pose AUC of estimated cameras");
  eval_poses->add_option("--estimated", poses_estimated, "Estimated poses")
      ->required();
  eval_poses->add_option("--truth", poses_truth, "Ground-truth poses")
      ->required();
  eval_poses
      ->add_option("--thresholds", thresholds,
                   "AUC thresholds in degrees")
      ->delimiter(',');
  eval_poses->add_flag("--rotation-only", rotation_only,
                       "Ignore translation direction errors");
  eval_poses->add_option("--report", poses_report, "JSON report");

  posegraph::ClusterOptions cluster;
  CLI::App* cmd_cluster = app.add_subcommand(
      "cluster", "Partition a similarity matrix into balanced groups");
  cmd_cluster->add_option("--matrix", cluster.matrix_path,
                          "Similarity matrix (pgmatrix)")
      ->required();
  cmd_cluster->add_option("--report", cluster.report_path, "JSON report")
      ->required();
  cmd_cluster->add_option("--n-clusters", cluster.n_clusters,
                          "Cluster count (0 derives it from --n-max)");
  cmd_cluster->add_option("--n-max", cluster.n_max,
                          "Maximum images per group");
  cmd_cluster->add_option("--bypass", cluster.bypass_threshold,
                          "Skip clustering at or below this many images");
  cmd_cluster->add_option("--expansion-knn", cluster.expansion_knn,
                          "Neighbors per node in the expansion graph");
  cmd_cluster->add_option("--imbalance", cluster.partition.imbalance,
                          "Cluster balance factor");
  cmd_cluster->add_option("--restarts", cluster.partition.restarts,
                          "Partitioner restarts");
  cmd_cluster->add_option("--seed", cluster.partition.seed,
                          "Partitioner seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_rank->parsed()) {
      rank.threads = threads;
      const posegraph::RankSummary summary = posegraph::run_rank(rank);
      std::printf("ranked %d images in %d group(s): %d pairs covered, %d "
                  "masked\n",
                  summary.num_images, summary.clusters, summary.covered_pairs,
                  summary.masked_pairs);
    } else if (cmd_select->parsed()) {
      select.threads = threads;
      select.knn_baseline = baseline == "knn";
      select.knn_k = select.config.k;
      const posegraph::SelectSummary summary = posegraph::run_select(select);
      for (const std::string& warning : summary.selection.warnings) {
        std::fprintf(stderr, "warning: %s\n", warning.c_str());
      }
      std::printf("selected %d pairs\n", summary.num_pairs);
      for (const posegraph::TreeStats& stats : summary.selection.iterations) {
        std::printf(
            "tree %d: %d edges, %d readmitted, union diameter %d\n",
            stats.mst_index, stats.edges_added, stats.readmitted,
            stats.union_diameter);
      }
      print_graph(summary.graph);
    } else if (cmd_oracle->parsed()) {
      oracle.layout = posegraph::parse_layout(layout);
      const posegraph::OracleSummary summary = posegraph::run_oracle(oracle);
      std::printf("oracle: %d cameras, %d points, %d pairs masked by the "
                  "inlier filter\n",
                  summary.num_cameras, summary.num_points,
                  summary.masked_pairs);
    } else if (eval_ranking->parsed()) {
      const posegraph::RankingEvalSummary summary =
          posegraph::evaluate_ranking(eval_predicted, eval_truth, eval_report);
      if (summary.zero_ideal) {
        std::fprintf(stderr,
                     "warning: ideal DCG is zero; NDCG defined as 1.0\n");
      }
      std::printf("pairs: %d\nDCG: %.12g\nNDCG: %.12g\n", summary.num_pairs,
                  summary.dcg_value, summary.ndcg_value);
    } else if (eval_pairs->parsed()) {
      const posegraph::PairsEvalSummary summary = posegraph::evaluate_pairs(
          pairs_path, pairs_matrix, pairs_report, threads);
      print_graph(summary.graph);
    } else if (eval_poses->parsed()) {
      const posegraph::PoseEvalSummary summary = posegraph::evaluate_poses(
          poses_estimated, poses_truth, thresholds, rotation_only,
          poses_report);
      std::printf("pairs: %d (%d unregistered)\n", summary.num_pairs,
                  summary.unregistered_pairs);
      for (const auto& [threshold, auc] : summary.auc) {
        std::printf("AUC@%g: %.12g\n", threshold, auc);
      }
    } else if (cmd_cluster->parsed()) {
      const posegraph::ClusterSummary summary = posegraph::run_cluster(cluster);
      std::printf("clusters: %d, cut similarity %.6g\n",
                  summary.partition.num_clusters, summary.cut);
      for (int c = 0; c < summary.partition.num_clusters; ++c) {
        std::printf("cluster %d: %zu base, %zu expanded\n", c,
                    summary.partition.members[c].size(),
                    summary.partition.expanded_members[c].size());
      }
    }
  } catch (const std::exception& error) {
    std::fprintf(stderr, "error: %s\n", error.what());
    return 1;
  }
  return 0;
}
