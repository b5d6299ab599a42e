#pragma once

#include <cstdint>
#include <vector>

namespace posegraph {

// Sentinel for "no path exists". Kept distinct from every valid hop count so
// it can never leak into distance arithmetic.
inline constexpr std::int32_t kUnreachable = -1;

struct WeightedEdge {
  int u = 0;  // canonical: u < v
  int v = 0;
  double weight = 0.0;
};

// Undirected weighted graph over node ids [0, num_nodes). Each unordered pair
// is stored once with u < v; self loops and duplicate pairs are rejected.
class ImageGraph {
 public:
  explicit ImageGraph(int num_nodes);

  void add_edge(int u, int v, double weight);
  bool has_edge(int u, int v) const;

  int num_nodes() const { return num_nodes_; }
  const std::vector<WeightedEdge>& edges() const { return edges_; }

  // Neighbor lists, ascending node ids.
  std::vector<std::vector<int>> adjacency() const;

 private:
  int num_nodes_ = 0;
  std::vector<WeightedEdge> edges_;
  std::vector<std::vector<bool>> present_;
};

// Union-find with union by rank and path compression.
class DisjointSet {
 public:
  explicit DisjointSet(int n);

  int find(int x);
  // Merges the sets of x and y; returns false if already joined.
  bool unite(int x, int y);
  int components() const { return components_; }

 private:
  std::vector<int> parent_;
  std::vector<int> rank_;
  int components_ = 0;
};

// Symmetric matrix of hop-count shortest-path distances. dist(i,i) == 0,
// kUnreachable for disconnected pairs.
class HopDistanceMatrix {
 public:
  explicit HopDistanceMatrix(int size);

  int size() const { return size_; }
  std::int32_t at(int i, int j) const { return dist_[index(i, j)]; }
  void set(int i, int j, std::int32_t d);

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * size_ + j;
  }
  int size_ = 0;
  std::vector<std::int32_t> dist_;
};

// Minimum-weight spanning forest by Kruskal's algorithm. Equal-weight edges
// are ordered by (min node id, max node id) so the output is reproducible.
std::vector<WeightedEdge> kruskal_mst(const ImageGraph& graph);

// Hop counts from `source` to every node; kUnreachable where no path exists.
std::vector<std::int32_t> bfs_hop_distances(const ImageGraph& graph,
                                            int source);

// All-pairs hop distances via one BFS per source. `threads` bounds the worker
// count; the result is identical for any thread count.
HopDistanceMatrix all_pairs_hop_distances(const ImageGraph& graph,
                                          int threads = 1);

// max over all pairs, or kUnreachable if any pair is disconnected.
std::int32_t graph_diameter(const HopDistanceMatrix& distances);

bool is_connected(const ImageGraph& graph);

int count_components(const ImageGraph& graph);

}  // namespace posegraph
