#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "doctest.h"
#include "posegraph/graph.hpp"
#include "support/reference.hpp"

using namespace posegraph;

namespace {

std::set<std::pair<int, int>> edge_set(const std::vector<WeightedEdge>& edges) {
  std::set<std::pair<int, int>> out;
  for (const auto& e : edges) {
    out.emplace(e.u, e.v);
  }
  return out;
}

double total_weight(const std::vector<WeightedEdge>& edges) {
  double sum = 0.0;
  for (const auto& e : edges) {
    sum += e.weight;
  }
  return sum;
}

}  // namespace

TEST_CASE("image graph stores canonical edges and rejects bad input") {
  ImageGraph graph(4);
  graph.add_edge(2, 0, 0.5);
  CHECK(graph.has_edge(0, 2));
  CHECK(graph.has_edge(2, 0));
  CHECK(graph.edges().size() == 1);
  CHECK(graph.edges()[0].u == 0);
  CHECK(graph.edges()[0].v == 2);

  CHECK_THROWS_AS(graph.add_edge(1, 1, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(graph.add_edge(0, 4, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(graph.add_edge(-1, 2, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(graph.add_edge(2, 0, 0.9), std::invalid_argument);

  auto adj = graph.adjacency();
  REQUIRE(adj.size() == 4);
  CHECK(adj[0] == std::vector<int>{2});
  CHECK(adj[2] == std::vector<int>{0});
  CHECK(adj[1].empty());
}

TEST_CASE("disjoint set merges and counts components") {
  DisjointSet ds(5);
  CHECK(ds.components() == 5);
  CHECK(ds.unite(0, 1));
  CHECK(ds.unite(1, 2));
  CHECK_FALSE(ds.unite(0, 2));
  CHECK(ds.components() == 3);
  CHECK(ds.find(0) == ds.find(2));
  CHECK(ds.find(3) != ds.find(4));
}

TEST_CASE("kruskal picks the cheap triangle edges") {
  ImageGraph graph(3);
  graph.add_edge(0, 1, 0.1);
  graph.add_edge(1, 2, 0.2);
  graph.add_edge(0, 2, 0.9);
  auto tree = kruskal_mst(graph);
  REQUIRE(tree.size() == 2);
  CHECK(edge_set(tree) == std::set<std::pair<int, int>>{{0, 1}, {1, 2}});
  CHECK(total_weight(tree) == doctest::Approx(0.3));
}

TEST_CASE("kruskal handles trivial and disconnected graphs") {
  CHECK(kruskal_mst(ImageGraph(1)).empty());
  CHECK(kruskal_mst(ImageGraph(0)).empty());

  ImageGraph two(2);
  two.add_edge(0, 1, 0.7);
  auto tree = kruskal_mst(two);
  REQUIRE(tree.size() == 1);
  CHECK(tree[0].weight == 0.7);

  ImageGraph forest(5);
  forest.add_edge(0, 1, 0.2);
  forest.add_edge(1, 2, 0.4);
  forest.add_edge(0, 2, 0.1);
  forest.add_edge(3, 4, 0.5);
  auto spanning = kruskal_mst(forest);
  CHECK(spanning.size() == 3);
  DisjointSet ds(5);
  for (const auto& e : spanning) {
    CHECK(ds.unite(e.u, e.v));
  }
  CHECK(ds.components() == 2);
}

TEST_CASE("kruskal is deterministic under equal weights") {
  ImageGraph graph(4);
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      graph.add_edge(i, j, 0.25);
    }
  }
  auto tree = kruskal_mst(graph);
  CHECK(edge_set(tree) ==
        std::set<std::pair<int, int>>{{0, 1}, {0, 2}, {0, 3}});
}

TEST_CASE("kruskal matches exhaustive enumeration on random graphs") {
  std::mt19937_64 rng(20260814);
  for (int trial = 0; trial < 60; ++trial) {
    int n = 2 + static_cast<int>(rng() % 7);
    auto graph = testsupport::random_connected_graph(rng, n, 0.6, 16);
    auto tree = kruskal_mst(graph);
    REQUIRE(static_cast<int>(tree.size()) == n - 1);
    double expected = testsupport::brute_force_min_spanning_weight(graph);
    CHECK(total_weight(tree) == expected);
  }
}

TEST_CASE("bfs hop distances walk paths, stars and fragments") {
  ImageGraph path(4);
  path.add_edge(0, 1, 1.0);
  path.add_edge(1, 2, 1.0);
  path.add_edge(2, 3, 1.0);
  CHECK(bfs_hop_distances(path, 0) ==
        std::vector<std::int32_t>{0, 1, 2, 3});

  ImageGraph split(2);
  CHECK(bfs_hop_distances(split, 0) ==
        std::vector<std::int32_t>{0, kUnreachable});

  ImageGraph star(4);
  star.add_edge(0, 1, 1.0);
  star.add_edge(0, 2, 1.0);
  star.add_edge(0, 3, 1.0);
  CHECK(bfs_hop_distances(star, 1) ==
        std::vector<std::int32_t>{1, 0, 2, 2});

  CHECK_THROWS_AS(bfs_hop_distances(star, 4), std::invalid_argument);
  CHECK_THROWS_AS(bfs_hop_distances(star, -1), std::invalid_argument);
}

TEST_CASE("all pairs hop distances agree with floyd-warshall") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + static_cast<int>(rng() % 28);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    ImageGraph graph(n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (coin(rng) < 0.15) {
          graph.add_edge(i, j, 1.0);
        }
      }
    }
    auto dist = all_pairs_hop_distances(graph);
    auto expected = testsupport::floyd_warshall_hops(graph);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        CHECK(dist.at(i, j) == expected[i][j]);
        CHECK(dist.at(i, j) == dist.at(j, i));
      }
    }
  }
}

TEST_CASE("all pairs hop distances are thread-count invariant") {
  std::mt19937_64 rng(5150);
  auto graph = testsupport::random_connected_graph(rng, 40, 0.1, 120);
  auto serial = all_pairs_hop_distances(graph, 1);
  auto parallel = all_pairs_hop_distances(graph, 4);
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 40; ++j) {
      CHECK(serial.at(i, j) == parallel.at(i, j));
    }
  }
}

TEST_CASE("graph diameter covers path, complete and isolated cases") {
  ImageGraph path(4);
  path.add_edge(0, 1, 1.0);
  path.add_edge(1, 2, 1.0);
  path.add_edge(2, 3, 1.0);
  CHECK(graph_diameter(all_pairs_hop_distances(path)) == 3);

  ImageGraph complete(5);
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) {
      complete.add_edge(i, j, 1.0);
    }
  }
  CHECK(graph_diameter(all_pairs_hop_distances(complete)) == 1);

  ImageGraph isolated(3);
  isolated.add_edge(0, 1, 1.0);
  CHECK(graph_diameter(all_pairs_hop_distances(isolated)) == kUnreachable);

  ImageGraph single(1);
  CHECK(graph_diameter(all_pairs_hop_distances(single)) == 0);
}

TEST_CASE("connectivity helpers count components") {
  ImageGraph graph(6);
  graph.add_edge(0, 1, 1.0);
  graph.add_edge(2, 3, 1.0);
  CHECK_FALSE(is_connected(graph));
  CHECK(count_components(graph) == 4);

  graph.add_edge(1, 2, 1.0);
  graph.add_edge(3, 4, 1.0);
  graph.add_edge(4, 5, 1.0);
  CHECK(is_connected(graph));
  CHECK(count_components(graph) == 1);

  CHECK(is_connected(ImageGraph(1)));
  CHECK(is_connected(ImageGraph(0)));
}
