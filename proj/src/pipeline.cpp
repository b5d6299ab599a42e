#include "posegraph/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "posegraph/error.hpp"
#include "posegraph/gnn.hpp"
#include "posegraph/matrix_io.hpp"
#include "posegraph/pose_io.hpp"
#include "posegraph/tensor_io.hpp"

namespace posegraph {

namespace {

using nlohmann::json;

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write file: " + path.string());
  out << text;
  if (!out) throw FormatError("failed writing file: " + path.string());
}

void write_report(const std::filesystem::path& path, const json& report) {
  if (path.empty()) return;
  write_text_file(path, report.dump(2) + "\n");
}

// Embedding similarity in [0,1]: cosine mapped affinely, zero-norm columns
// treated as orthogonal.
ScoreMatrix embedding_similarity(const Eigen::MatrixXd& values) {
  const int n = static_cast<int>(values.cols());
  ScoreMatrix sim(n);
  Eigen::VectorXd norms(n);
  for (int i = 0; i < n; ++i) norms(i) = values.col(i).norm();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double c = 0.0;
      if (norms(i) > 1e-12 && norms(j) > 1e-12) {
        c = values.col(i).dot(values.col(j)) / (norms(i) * norms(j));
        c = std::clamp(c, -1.0, 1.0);
      }
      sim.set(i, j, 0.5 * (1.0 + c));
    }
  }
  return sim;
}

json graph_report_json(const GraphReport& report) {
  return json{{"num_nodes", report.num_nodes},
              {"num_edges", report.num_edges},
              {"num_components", report.num_components},
              {"diameter", report.diameter},
              {"mean_degree", report.mean_degree}};
}

}  // namespace

RankSummary run_rank(const RankOptions& options) {
  const EmbeddingSet embeddings = read_embeddings(options.embeddings_path);
  const GnnWeights weights = load_gnn_weights(options.weights_path);
  const int n = static_cast<int>(embeddings.names.size());
  if (n < 1) {
    throw std::invalid_argument("run_rank: embedding file has no images");
  }
  if (embeddings.values.rows() != weights.node_dim()) {
    throw std::invalid_argument(
        "run_rank: embedding dimension does not match the weights");
  }
  if (options.n_max < 1) {
    throw std::invalid_argument("run_rank: n_max must be >= 1");
  }

  const int clusters =
      num_clusters(n, options.n_max, options.bypass_threshold);
  RankSummary summary;
  summary.num_images = n;
  summary.clusters = clusters;

  ScoreMatrix scores(n);
  json cluster_report = json::array();
  if (n >= 2) {
    if (clusters == 1) {
      scores = predict_edge_ranks(embeddings.values, weights);
    } else {
      const ScoreMatrix similarity = embedding_similarity(embeddings.values);
      Partition partition =
          partition_graph(similarity, clusters, options.partition);
      const ImageGraph knn = build_knn_graph(
          similarity, std::min(options.expansion_knn, n - 1));
      partition = expand_one_hop(partition, knn);
      std::vector<ScoreFragment> fragments;
      for (int c = 0; c < partition.num_clusters; ++c) {
        const std::vector<int>& ids = partition.expanded_members[c];
        Eigen::MatrixXd sub(embeddings.values.rows(), ids.size());
        for (std::size_t k = 0; k < ids.size(); ++k) {
          sub.col(k) = embeddings.values.col(ids[k]);
        }
        fragments.push_back({ids, predict_edge_ranks(sub, weights)});
        cluster_report.push_back(
            {{"cluster", c},
             {"base_size", partition.members[c].size()},
             {"expanded_size", ids.size()}});
      }
      scores = merge_predictions(fragments, n).scores;
    }
  }

  write_score_matrix(options.output_path, {embeddings.names, scores});
  summary.covered_pairs = scores.count_unmasked_pairs();
  summary.masked_pairs = n * (n - 1) / 2 - summary.covered_pairs;

  write_report(options.report_path,
               json{{"command", "rank"},
                    {"num_images", n},
                    {"clusters", clusters},
                    {"covered_pairs", summary.covered_pairs},
                    {"masked_pairs", summary.masked_pairs},
                    {"cluster_detail", cluster_report}});
  return summary;
}

SelectSummary run_select(const SelectOptions& options) {
  const NamedScoreMatrix input = read_score_matrix(options.matrix_path);
  const int n = input.scores.size();

  SelectSummary summary;
  json report{{"command", "select"}, {"num_images", n}};
  if (options.knn_baseline) {
    const std::vector<std::pair<int, int>> edges =
        knn_select(input.scores, options.knn_k);
    write_text_file(options.pairs_path, emit_pair_list(edges, input.names));
    ImageGraph graph(n);
    for (const auto& [u, v] : edges) graph.add_edge(u, v, 1.0);
    summary.selection.num_nodes = n;
    summary.graph = graph_report(graph, options.threads);
    summary.num_pairs = static_cast<int>(edges.size());
    report["baseline"] = "knn";
    report["k"] = options.knn_k;
  } else {
    const MultiMstResult result = build_multi_mst(input.scores, options.config);
    write_text_file(options.pairs_path,
                    emit_pair_list(result.graph, input.names));
    summary.selection = result.report;
    summary.graph = graph_report(result.graph.to_graph(), options.threads);
    summary.num_pairs = static_cast<int>(result.graph.edges.size());
    report["k"] = options.config.k;
    report["lambda"] = options.config.lambda;
    report["top_candidates"] = options.config.top_candidates;
    report["rank_threshold"] = options.config.rank_threshold;
    report["modulation_enabled"] = options.config.modulation_enabled;
    report["distance_normalization_enabled"] =
        options.config.distance_normalization_enabled;
    json iterations = json::array();
    for (const TreeStats& stats : result.report.iterations) {
      iterations.push_back({{"mst_index", stats.mst_index},
                            {"edges_added", stats.edges_added},
                            {"readmitted", stats.readmitted},
                            {"union_diameter", stats.union_diameter}});
    }
    report["iterations"] = iterations;
    report["warnings"] = result.report.warnings;
  }
  report["num_pairs"] = summary.num_pairs;
  report["graph"] = graph_report_json(summary.graph);
  write_report(options.report_path, report);
  return summary;
}

OracleSummary run_oracle(const OracleOptions& options) {
  const SyntheticScene scene = generate_synthetic_scene(
      options.seed, options.num_cameras, options.num_points, options.layout);
  const Eigen::MatrixXd u = inlier_counts(scene, options.noise);
  const Eigen::MatrixXd v = covisibility_counts(scene);
  ScoreMatrix ranks = combine_scores(u, v, options.normalize);
  int masked = 0;
  if (options.min_inliers > 0) {
    masked = apply_min_inlier_filter(&ranks, u, options.min_inliers);
  }
  write_score_matrix(options.output_path, {scene.camera_names(), ranks});

  if (!options.poses_path.empty()) {
    PoseSet poses;
    for (const Camera& camera : scene.cameras) {
      PoseRecord record;
      record.name = camera.name;
      record.rotation = Eigen::Quaterniond(camera.rotation);
      record.translation = camera.translation;
      record.registered = true;
      poses.push_back(std::move(record));
    }
    write_pose_file(options.poses_path, poses);
  }

  OracleSummary summary;
  summary.num_cameras = scene.num_cameras();
  summary.num_points = scene.num_points();
  summary.masked_pairs = masked;
  write_report(options.report_path,
               json{{"command", "oracle"},
                    {"layout", layout_name(options.layout)},
                    {"seed", options.seed},
                    {"num_cameras", summary.num_cameras},
                    {"num_points", summary.num_points},
                    {"min_inliers", options.min_inliers},
                    {"masked_pairs", masked}});
  return summary;
}

RankingEvalSummary evaluate_ranking(const std::filesystem::path& predicted,
                                    const std::filesystem::path& truth,
                                    const std::filesystem::path& report_path) {
  const NamedScoreMatrix pred = read_score_matrix(predicted);
  const NamedScoreMatrix gt = read_score_matrix(truth);
  if (pred.names != gt.names) {
    throw std::invalid_argument(
        "evaluate_ranking: image manifests differ between the two matrices");
  }
  const std::vector<RankedItem> items =
      ranked_list_from_matrices(pred.scores, gt.scores);
  RankingEvalSummary summary;
  summary.num_pairs = static_cast<int>(items.size());
  summary.dcg_value = dcg(items);
  summary.ideal = ideal_dcg(summary.num_pairs);
  summary.zero_ideal = summary.ideal == 0.0;
  summary.ndcg_value = ndcg(items);
  write_report(report_path, json{{"command", "evaluate-ranking"},
                                 {"num_pairs", summary.num_pairs},
                                 {"dcg", summary.dcg_value},
                                 {"ideal_dcg", summary.ideal},
                                 {"ndcg", summary.ndcg_value},
                                 {"zero_ideal", summary.zero_ideal}});
  return summary;
}

PairsEvalSummary evaluate_pairs(const std::filesystem::path& pairs,
                                const std::filesystem::path& matrix,
                                const std::filesystem::path& report_path,
                                int threads) {
  const NamedScoreMatrix manifest = read_score_matrix(matrix);
  const std::vector<std::pair<int, int>> edges =
      parse_pair_list(read_text_file(pairs), manifest.names);
  const std::set<std::pair<int, int>> unique(edges.begin(), edges.end());
  ImageGraph graph(static_cast<int>(manifest.names.size()));
  for (const auto& [u, v] : unique) graph.add_edge(u, v, 1.0);
  PairsEvalSummary summary;
  summary.graph = graph_report(graph, threads);
  write_report(report_path, json{{"command", "evaluate-pairs"},
                                 {"graph", graph_report_json(summary.graph)}});
  return summary;
}

PoseEvalSummary evaluate_poses(const std::filesystem::path& estimated,
                               const std::filesystem::path& ground_truth,
                               const std::vector<double>& thresholds_deg,
                               bool rotation_only,
                               const std::filesystem::path& report_path) {
  const PoseSet est = read_pose_file(estimated);
  const PoseSet gt = read_pose_file(ground_truth);
  const std::vector<double> errors =
      pairwise_pose_errors(est, gt, rotation_only);
  PoseEvalSummary summary;
  summary.num_pairs = static_cast<int>(errors.size());
  summary.unregistered_pairs = static_cast<int>(
      std::count_if(errors.begin(), errors.end(),
                    [](double e) { return std::isinf(e); }));
  json auc_report = json::array();
  for (const double t : thresholds_deg) {
    const double auc = auc_from_errors(errors, t);
    summary.auc.emplace_back(t, auc);
    auc_report.push_back({{"threshold_deg", t}, {"auc", auc}});
  }
  write_report(report_path,
               json{{"command", "evaluate-poses"},
                    {"num_pairs", summary.num_pairs},
                    {"unregistered_pairs", summary.unregistered_pairs},
                    {"rotation_only", rotation_only},
                    {"auc", auc_report}});
  return summary;
}

ClusterSummary run_cluster(const ClusterOptions& options) {
  const NamedScoreMatrix input = read_score_matrix(options.matrix_path);
  const int n = input.scores.size();
  const int clusters =
      options.n_clusters > 0
          ? options.n_clusters
          : num_clusters(n, options.n_max, options.bypass_threshold);

  ClusterSummary summary;
  summary.partition = partition_graph(input.scores, clusters, options.partition);
  if (clusters > 1 && options.expansion_knn > 0 && n > 1) {
    const ImageGraph knn = build_knn_graph(
        input.scores, std::min(options.expansion_knn, n - 1));
    summary.partition = expand_one_hop(summary.partition, knn);
  }
  summary.cut = cut_similarity(input.scores, summary.partition.assignment);

  json clusters_json = json::array();
  for (int c = 0; c < summary.partition.num_clusters; ++c) {
    json members = json::array();
    for (int node : summary.partition.members[c]) {
      members.push_back(input.names[node]);
    }
    json expanded = json::array();
    for (int node : summary.partition.expanded_members[c]) {
      expanded.push_back(input.names[node]);
    }
    clusters_json.push_back({{"cluster", c},
                             {"members", members},
                             {"expanded_members", expanded}});
  }
  write_report(options.report_path, json{{"command", "cluster"},
                                         {"num_images", n},
                                         {"num_clusters", clusters},
                                         {"cut_similarity", summary.cut},
                                         {"clusters", clusters_json}});
  return summary;
}

}  // namespace posegraph
