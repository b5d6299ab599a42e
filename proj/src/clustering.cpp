#include "posegraph/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "posegraph/error.hpp"

namespace posegraph {

namespace {

double affinity(const ScoreMatrix& sim, int node, int other) {
  if (node == other || sim.masked(node, other)) return 0.0;
  return sim.at(node, other);
}

struct Bisection {
  std::vector<char> in_first;  // per local index
  double cut = std::numeric_limits<double>::infinity();
};

// Greedy single-node moves and balanced swaps until no improving step
// remains. `lo`/`hi` bound the first side's size.
void refine(const ScoreMatrix& sim, const std::vector<int>& nodes, int lo,
            int hi, std::vector<char>* in_first) {
  const int n = static_cast<int>(nodes.size());
  std::vector<double> to_first(n, 0.0), to_second(n, 0.0);
  auto recompute = [&]() {
    for (int a = 0; a < n; ++a) {
      to_first[a] = 0.0;
      to_second[a] = 0.0;
      for (int b = 0; b < n; ++b) {
        if (a == b) continue;
        const double s = affinity(sim, nodes[a], nodes[b]);
        if ((*in_first)[b]) {
          to_first[a] += s;
        } else {
          to_second[a] += s;
        }
      }
    }
  };
  recompute();
  int first_size = static_cast<int>(
      std::count(in_first->begin(), in_first->end(), char(1)));

  const int max_passes = 2 * n + 8;
  for (int pass = 0; pass < max_passes; ++pass) {
    bool moved = false;
    for (int a = 0; a < n; ++a) {
      const bool first = (*in_first)[a] != 0;
      const double gain =
          first ? to_second[a] - to_first[a] : to_first[a] - to_second[a];
      if (gain <= 1e-12) continue;
      const int new_first = first ? first_size - 1 : first_size + 1;
      if (new_first < lo || new_first > hi) continue;
      (*in_first)[a] = first ? 0 : 1;
      first_size = new_first;
      for (int b = 0; b < n; ++b) {
        if (a == b) continue;
        const double s = affinity(sim, nodes[a], nodes[b]);
        if (first) {
          to_first[b] -= s;
          to_second[b] += s;
        } else {
          to_first[b] += s;
          to_second[b] -= s;
        }
      }
      moved = true;
    }
    if (moved) continue;

    // Size-preserving swap pass for when the balance window blocks moves.
    bool swapped = false;
    for (int a = 0; a < n && !swapped; ++a) {
      if (!(*in_first)[a]) continue;
      for (int b = 0; b < n; ++b) {
        if ((*in_first)[b]) continue;
        const double gain = (to_second[a] - to_first[a]) +
                            (to_first[b] - to_second[b]) -
                            2.0 * affinity(sim, nodes[a], nodes[b]);
        if (gain > 1e-12) {
          (*in_first)[a] = 0;
          (*in_first)[b] = 1;
          recompute();
          swapped = true;
          break;
        }
      }
    }
    if (!swapped) break;
  }
}

double side_cut(const ScoreMatrix& sim, const std::vector<int>& nodes,
                const std::vector<char>& in_first) {
  double cut = 0.0;
  const int n = static_cast<int>(nodes.size());
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (in_first[a] != in_first[b]) {
        cut += affinity(sim, nodes[a], nodes[b]);
      }
    }
  }
  return cut;
}

// Seeds the two sides with the least-similar node pair and grows by
// strongest attachment.
std::vector<char> growth_init(const ScoreMatrix& sim,
                              const std::vector<int>& nodes, int hi_first,
                              int hi_second) {
  const int n = static_cast<int>(nodes.size());
  int seed_a = 0, seed_b = 1;
  double worst = std::numeric_limits<double>::infinity();
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const double s = affinity(sim, nodes[a], nodes[b]);
      if (s < worst) {
        worst = s;
        seed_a = a;
        seed_b = b;
      }
    }
  }
  std::vector<char> in_first(n, 0);
  std::vector<char> assigned(n, 0);
  std::vector<double> to_first(n, 0.0), to_second(n, 0.0);
  int first_size = 0, second_size = 0;
  auto place = [&](int a, bool first) {
    assigned[a] = 1;
    in_first[a] = first ? 1 : 0;
    (first ? first_size : second_size) += 1;
    for (int b = 0; b < n; ++b) {
      if (assigned[b] || a == b) continue;
      const double s = affinity(sim, nodes[a], nodes[b]);
      (first ? to_first[b] : to_second[b]) += s;
    }
  };
  place(seed_a, true);
  place(seed_b, false);
  for (int step = 2; step < n; ++step) {
    int best = -1;
    bool best_first = true;
    double best_pull = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a) {
      if (assigned[a]) continue;
      if (first_size < hi_first) {
        const double pull = to_first[a] - to_second[a];
        if (pull > best_pull) {
          best_pull = pull;
          best = a;
          best_first = true;
        }
      }
      if (second_size < hi_second) {
        const double pull = to_second[a] - to_first[a];
        if (pull > best_pull) {
          best_pull = pull;
          best = a;
          best_first = false;
        }
      }
    }
    place(best, best_first);
  }
  return in_first;
}

Bisection bisect(const ScoreMatrix& sim, const std::vector<int>& nodes,
                 int target_first, int lo, int hi,
                 const PartitionConfig& config, std::uint64_t salt) {
  const int n = static_cast<int>(nodes.size());
  Bisection best;
  auto consider = [&](std::vector<char> in_first) {
    refine(sim, nodes, lo, hi, &in_first);
    const double cut = side_cut(sim, nodes, in_first);
    if (cut < best.cut - 1e-12 ||
        (std::abs(cut - best.cut) <= 1e-12 && in_first < best.in_first)) {
      best.cut = cut;
      best.in_first = std::move(in_first);
    }
  };

  consider(growth_init(sim, nodes, hi, n - lo));

  std::mt19937_64 rng(config.seed ^ (salt * 0x9e3779b97f4a7c15ULL + 1));
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  for (int r = 0; r < config.restarts; ++r) {
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<char> in_first(n, 0);
    for (int i = 0; i < target_first; ++i) in_first[order[i]] = 1;
    consider(std::move(in_first));
  }
  return best;
}

void split_recursive(const ScoreMatrix& sim, const std::vector<int>& nodes,
                     int k, int cluster_base, int cap,
                     const PartitionConfig& config, std::uint64_t salt,
                     std::vector<int>* assignment) {
  if (k == 1) {
    for (int node : nodes) (*assignment)[node] = cluster_base;
    return;
  }
  const int n = static_cast<int>(nodes.size());
  const int k1 = (k + 1) / 2;
  const int k2 = k - k1;
  const int lo = std::max(k1, n - k2 * cap);
  const int hi = std::min(k1 * cap, n - k2);
  if (lo > hi) {
    throw std::invalid_argument(
        "partition_graph: balance constraints are infeasible");
  }
  int target = static_cast<int>(std::lround(
      static_cast<double>(n) * k1 / k));
  target = std::clamp(target, lo, hi);

  const Bisection cut = bisect(sim, nodes, target, lo, hi, config, salt);
  std::vector<int> first, second;
  for (int a = 0; a < n; ++a) {
    (cut.in_first[a] ? first : second).push_back(nodes[a]);
  }
  split_recursive(sim, first, k1, cluster_base, cap, config, salt * 2 + 1,
                  assignment);
  split_recursive(sim, second, k2, cluster_base + k1, cap, config,
                  salt * 2 + 2, assignment);
}

}  // namespace

int num_clusters(int n, int n_max, int bypass_threshold) {
  if (n < 1) throw std::invalid_argument("num_clusters: n must be >= 1");
  if (n_max < 1) throw std::invalid_argument("num_clusters: n_max must be >= 1");
  if (n <= bypass_threshold) return 1;
  return 1 + n / n_max;
}

void PartitionConfig::validate() const {
  if (!(imbalance >= 1.0)) {
    throw std::invalid_argument("PartitionConfig: imbalance must be >= 1");
  }
  if (restarts < 0) {
    throw std::invalid_argument("PartitionConfig: restarts must be >= 0");
  }
}

double cut_similarity(const ScoreMatrix& similarity,
                      const std::vector<int>& assignment) {
  const int n = similarity.size();
  if (static_cast<int>(assignment.size()) != n) {
    throw std::invalid_argument("cut_similarity: assignment size mismatch");
  }
  double cut = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (assignment[i] != assignment[j]) cut += affinity(similarity, i, j);
    }
  }
  return cut;
}

Partition partition_graph(const ScoreMatrix& similarity, int n_clusters,
                          const PartitionConfig& config) {
  config.validate();
  const int n = similarity.size();
  if (n_clusters < 1) {
    throw std::invalid_argument("partition_graph: n_clusters must be >= 1");
  }
  if (n_clusters > n) {
    throw std::invalid_argument(
        "partition_graph: more clusters than nodes");
  }

  Partition partition;
  partition.num_clusters = n_clusters;
  partition.assignment.assign(n, 0);
  if (n_clusters > 1) {
    const int cap = std::max<int>(
        (n + n_clusters - 1) / n_clusters,
        static_cast<int>(config.imbalance * n / n_clusters));
    std::vector<int> nodes(n);
    for (int i = 0; i < n; ++i) nodes[i] = i;
    split_recursive(similarity, nodes, n_clusters, 0, cap, config, 1,
                    &partition.assignment);
  }
  partition.members.assign(n_clusters, {});
  for (int i = 0; i < n; ++i) {
    partition.members[partition.assignment[i]].push_back(i);
  }
  partition.expanded_members = partition.members;
  return partition;
}

ImageGraph build_knn_graph(const ScoreMatrix& similarity, int k) {
  const int n = similarity.size();
  if (k < 1) throw std::invalid_argument("build_knn_graph: k must be >= 1");
  ImageGraph graph(n);
  std::vector<std::pair<double, int>> partners;
  for (int i = 0; i < n; ++i) {
    partners.clear();
    for (int j = 0; j < n; ++j) {
      if (j == i || similarity.masked(i, j)) continue;
      partners.emplace_back(similarity.at(i, j), j);
    }
    std::sort(partners.begin(), partners.end(),
              [](const auto& a, const auto& b) {
                if (a.first != b.first) return a.first > b.first;
                return a.second < b.second;
              });
    const int take = std::min<int>(k, static_cast<int>(partners.size()));
    for (int t = 0; t < take; ++t) {
      const int j = partners[t].second;
      if (!graph.has_edge(i, j)) {
        graph.add_edge(i, j, similarity.at(i, j));
      }
    }
  }
  return graph;
}

Partition expand_one_hop(const Partition& partition, const ImageGraph& graph) {
  const int n = partition.num_nodes();
  if (graph.num_nodes() != n) {
    throw std::invalid_argument("expand_one_hop: graph size mismatch");
  }
  Partition expanded = partition;
  const std::vector<std::vector<int>> neighbors = graph.adjacency();
  for (int c = 0; c < partition.num_clusters; ++c) {
    std::vector<char> in_set(n, 0);
    for (int node : partition.members[c]) in_set[node] = 1;
    for (int node : partition.members[c]) {
      for (int neighbor : neighbors[node]) in_set[neighbor] = 1;
    }
    auto& out = expanded.expanded_members[c];
    out.clear();
    for (int i = 0; i < n; ++i) {
      if (in_set[i]) out.push_back(i);
    }
  }
  return expanded;
}

MergedPrediction merge_predictions(const std::vector<ScoreFragment>& fragments,
                                   int num_nodes) {
  if (num_nodes < 1) {
    throw std::invalid_argument("merge_predictions: num_nodes must be >= 1");
  }
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(num_nodes, num_nodes);
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(num_nodes, num_nodes);
  for (std::size_t f = 0; f < fragments.size(); ++f) {
    const ScoreFragment& fragment = fragments[f];
    const int local = static_cast<int>(fragment.node_ids.size());
    if (fragment.scores.size() != local) {
      throw FormatError("fragment " + std::to_string(f) +
                        ": score matrix does not match node list");
    }
    std::vector<char> seen(num_nodes, 0);
    for (int id : fragment.node_ids) {
      if (id < 0 || id >= num_nodes) {
        throw FormatError("fragment " + std::to_string(f) +
                          ": node id out of range");
      }
      if (seen[id]) {
        throw FormatError("fragment " + std::to_string(f) +
                          ": duplicate node id");
      }
      seen[id] = 1;
    }
    for (int a = 0; a < local; ++a) {
      for (int b = a + 1; b < local; ++b) {
        if (fragment.scores.masked(a, b)) continue;
        const int i = fragment.node_ids[a];
        const int j = fragment.node_ids[b];
        sums(i, j) += fragment.scores.at(a, b);
        sums(j, i) += fragment.scores.at(a, b);
        counts(i, j) += 1;
        counts(j, i) += 1;
      }
    }
  }
  MergedPrediction merged{ScoreMatrix(num_nodes), std::move(counts)};
  for (int i = 0; i < num_nodes; ++i) {
    for (int j = i + 1; j < num_nodes; ++j) {
      if (merged.contributions(i, j) > 0) {
        merged.scores.set(i, j, sums(i, j) / merged.contributions(i, j));
      }
    }
  }
  return merged;
}

}  // namespace posegraph
