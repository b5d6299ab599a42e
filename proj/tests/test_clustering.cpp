#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "posegraph/clustering.hpp"
#include "posegraph/error.hpp"
#include "support/reference.hpp"

using namespace posegraph;

namespace {

// Two dense blocks with zero cross similarity; block sizes a and b.
ScoreMatrix two_block_similarity(std::mt19937_64& rng, int a, int b) {
  std::uniform_real_distribution<double> dense(0.7, 1.0);
  ScoreMatrix sim(a + b);
  for (int i = 0; i < a + b; ++i) {
    for (int j = i + 1; j < a + b; ++j) {
      bool same = (i < a) == (j < a);
      sim.set(i, j, same ? dense(rng) : 0.0);
    }
  }
  return sim;
}

std::set<int> cluster_of(const Partition& partition, int node) {
  int c = partition.assignment[node];
  return std::set<int>(partition.members[c].begin(),
                       partition.members[c].end());
}

}  // namespace

TEST_CASE("cluster count formula") {
  CHECK(num_clusters(1200, 500) == 3);
  CHECK(num_clusters(400, 500) == 1);
  CHECK(num_clusters(500, 500) == 1);
  CHECK(num_clusters(501, 500) == 2);
  CHECK(num_clusters(1, 1) == 1);
  CHECK(num_clusters(1000, 500) == 3);
  CHECK(num_clusters(300, 100, 200) == 4);
  CHECK(num_clusters(200, 100, 200) == 1);
  CHECK_THROWS_AS(num_clusters(0, 500), std::invalid_argument);
  CHECK_THROWS_AS(num_clusters(10, 0), std::invalid_argument);
}

TEST_CASE("partition config validation") {
  PartitionConfig config;
  CHECK_NOTHROW(config.validate());
  config.imbalance = 0.9;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = PartitionConfig{};
  config.restarts = -1;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("single-cluster partition is the identity grouping") {
  std::mt19937_64 rng(101);
  auto sim = testsupport::random_ranks(rng, 9);
  auto partition = partition_graph(sim, 1);
  CHECK(partition.num_clusters == 1);
  REQUIRE(partition.members.size() == 1);
  CHECK(static_cast<int>(partition.members[0].size()) == 9);
  CHECK(cut_similarity(sim, partition.assignment) == 0.0);
}

TEST_CASE("two blocks with zero cross similarity are recovered exactly") {
  std::mt19937_64 rng(103);
  for (auto [a, b] : {std::pair{6, 6}, std::pair{7, 5}, std::pair{4, 5}}) {
    auto sim = two_block_similarity(rng, a, b);
    auto partition = partition_graph(sim, 2);
    REQUIRE(partition.num_clusters == 2);

    std::set<int> left_expected;
    for (int i = 0; i < a; ++i) left_expected.insert(i);
    std::set<int> left_found = cluster_of(partition, 0);
    CHECK(left_found == left_expected);
    CHECK(cut_similarity(sim, partition.assignment) == 0.0);
  }
}

TEST_CASE("partitioning is invariant to node relabelling") {
  std::mt19937_64 rng(107);
  int n = 10;
  auto sim = two_block_similarity(rng, 5, 5);

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  ScoreMatrix shuffled(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      shuffled.set(perm[i], perm[j], sim.at(i, j));
    }
  }
  auto partition = partition_graph(shuffled, 2);
  // The image of block {0..4} under the permutation must land in one cluster.
  std::set<int> image;
  for (int i = 0; i < 5; ++i) image.insert(perm[i]);
  CHECK(cluster_of(partition, perm[0]) == image);
}

TEST_CASE("partition cut is near the exhaustive optimum on small instances") {
  std::mt19937_64 rng(109);
  for (int trial = 0; trial < 6; ++trial) {
    int n = 8 + static_cast<int>(rng() % 5);  // 8..12
    auto sim = testsupport::random_ranks(rng, n);
    PartitionConfig config;
    auto partition = partition_graph(sim, 2, config);
    double achieved = cut_similarity(sim, partition.assignment);

    int cap = std::max((n + 1) / 2,
                       static_cast<int>(config.imbalance * n / 2.0));
    double best = testsupport::exhaustive_bipartition_cut(sim, n - cap, cap);
    CHECK(achieved <= best * 1.10 + 1e-9);
    CHECK(achieved >= best - 1e-9);
  }
}

TEST_CASE("partition respects the balance cap") {
  std::mt19937_64 rng(113);
  for (int k : {2, 3, 4}) {
    auto sim = testsupport::random_ranks(rng, 23);
    PartitionConfig config;
    auto partition = partition_graph(sim, k, config);
    REQUIRE(partition.num_clusters == k);
    int cap = std::max((23 + k - 1) / k,
                       static_cast<int>(config.imbalance * 23.0 / k));
    int total = 0;
    for (const auto& members : partition.members) {
      CHECK(static_cast<int>(members.size()) <= cap);
      CHECK_FALSE(members.empty());
      total += static_cast<int>(members.size());
    }
    CHECK(total == 23);
  }
}

TEST_CASE("partitioning is deterministic for a fixed seed") {
  std::mt19937_64 rng(127);
  auto sim = testsupport::random_ranks(rng, 15);
  auto first = partition_graph(sim, 3);
  auto second = partition_graph(sim, 3);
  CHECK(first.assignment == second.assignment);
}

TEST_CASE("partition rejects invalid cluster counts") {
  std::mt19937_64 rng(131);
  auto sim = testsupport::random_ranks(rng, 5);
  CHECK_THROWS_AS(partition_graph(sim, 0), std::invalid_argument);
  CHECK_THROWS_AS(partition_graph(sim, 6), std::invalid_argument);
}

TEST_CASE("knn candidate graph takes each node's best partners") {
  ScoreMatrix sim(4);
  sim.set(0, 1, 0.9);
  sim.set(0, 2, 0.5);
  sim.set(0, 3, 0.1);
  sim.set(1, 2, 0.6);
  sim.set(1, 3, 0.2);
  sim.set(2, 3, 0.8);

  auto graph = build_knn_graph(sim, 1);
  CHECK(graph.has_edge(0, 1));
  CHECK(graph.has_edge(2, 3));
  CHECK(graph.edges().size() == 2);

  auto denser = build_knn_graph(sim, 2);
  CHECK(denser.has_edge(1, 2));
  CHECK_THROWS_AS(build_knn_graph(sim, 0), std::invalid_argument);

  sim.mask(0, 1);
  auto masked = build_knn_graph(sim, 1);
  CHECK_FALSE(masked.has_edge(0, 1));
}

TEST_CASE("one-hop expansion grows clusters by their boundary neighbors") {
  // Path 0-1-2-3-4-5 split in the middle.
  ImageGraph path(6);
  for (int i = 0; i + 1 < 6; ++i) path.add_edge(i, i + 1, 1.0);

  Partition partition;
  partition.num_clusters = 2;
  partition.assignment = {0, 0, 0, 1, 1, 1};
  partition.members = {{0, 1, 2}, {3, 4, 5}};
  partition.expanded_members = partition.members;

  auto expanded = expand_one_hop(partition, path);
  CHECK(expanded.expanded_members[0] == std::vector<int>{0, 1, 2, 3});
  CHECK(expanded.expanded_members[1] == std::vector<int>{2, 3, 4, 5});
  CHECK(expanded.members == partition.members);  // base sets untouched
}

TEST_CASE("one-hop expansion of a complete graph reaches every node") {
  ImageGraph complete(5);
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) complete.add_edge(i, j, 1.0);
  }
  Partition partition;
  partition.num_clusters = 2;
  partition.assignment = {0, 0, 0, 1, 1};
  partition.members = {{0, 1, 2}, {3, 4}};
  partition.expanded_members = partition.members;

  auto expanded = expand_one_hop(partition, complete);
  for (const auto& members : expanded.expanded_members) {
    CHECK(members == std::vector<int>{0, 1, 2, 3, 4});
  }
}

TEST_CASE("isolated clusters are unchanged by expansion") {
  ImageGraph graph(4);
  graph.add_edge(0, 1, 1.0);
  graph.add_edge(2, 3, 1.0);
  Partition partition;
  partition.num_clusters = 2;
  partition.assignment = {0, 0, 1, 1};
  partition.members = {{0, 1}, {2, 3}};
  partition.expanded_members = partition.members;

  auto expanded = expand_one_hop(partition, graph);
  CHECK(expanded.expanded_members == partition.members);
}

TEST_CASE("merging averages overlapping fragments") {
  ScoreFragment left;
  left.node_ids = {0, 1, 2};
  left.scores = ScoreMatrix(3);
  left.scores.set(0, 1, 0.4);
  left.scores.set(0, 2, 0.6);
  left.scores.set(1, 2, 0.4);

  ScoreFragment right;
  right.node_ids = {1, 2, 3};
  right.scores = ScoreMatrix(3);
  right.scores.set(0, 1, 0.8);  // global (1,2)
  right.scores.set(0, 2, 0.5);
  right.scores.set(1, 2, 0.3);

  auto merged = merge_predictions({left, right}, 4);
  CHECK(merged.scores.at(0, 1) == 0.4);
  CHECK(merged.scores.at(1, 2) == doctest::Approx(0.6));  // (0.4+0.8)/2
  CHECK(merged.contributions(1, 2) == 2);
  CHECK(merged.contributions(0, 1) == 1);
  CHECK(merged.scores.masked(0, 3));  // covered by no fragment
  CHECK(merged.contributions(0, 3) == 0);

  auto swapped = merge_predictions({right, left}, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      CHECK(merged.scores.masked(i, j) == swapped.scores.masked(i, j));
      if (!merged.scores.masked(i, j)) {
        CHECK(merged.scores.at(i, j) == swapped.scores.at(i, j));
      }
    }
  }
}

TEST_CASE("merging a single fragment is the identity on its pairs") {
  std::mt19937_64 rng(137);
  ScoreFragment fragment;
  fragment.node_ids = {2, 4, 5, 7};
  fragment.scores = testsupport::random_ranks(rng, 4);
  auto merged = merge_predictions({fragment}, 9);
  for (int a = 0; a < 4; ++a) {
    for (int b = a + 1; b < 4; ++b) {
      CHECK(merged.scores.at(fragment.node_ids[a], fragment.node_ids[b]) ==
            fragment.scores.at(a, b));
    }
  }
  CHECK(merged.scores.masked(0, 1));
}

TEST_CASE("merge validates fragment shape and ids") {
  ScoreFragment bad_size;
  bad_size.node_ids = {0, 1};
  bad_size.scores = ScoreMatrix(3);
  CHECK_THROWS_AS(merge_predictions({bad_size}, 4), FormatError);

  ScoreFragment out_of_range;
  out_of_range.node_ids = {0, 9};
  out_of_range.scores = ScoreMatrix(2);
  CHECK_THROWS_AS(merge_predictions({out_of_range}, 4), FormatError);

  ScoreFragment duplicated;
  duplicated.node_ids = {1, 1};
  duplicated.scores = ScoreMatrix(2);
  CHECK_THROWS_AS(merge_predictions({duplicated}, 4), FormatError);
}
