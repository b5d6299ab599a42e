#include "posegraph/graph.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <string>
#include <thread>

namespace posegraph {

ImageGraph::ImageGraph(int num_nodes) : num_nodes_(num_nodes) {
  if (num_nodes < 0) {
    throw std::invalid_argument("ImageGraph: negative node count");
  }
  present_.assign(num_nodes, std::vector<bool>(num_nodes, false));
}

void ImageGraph::add_edge(int u, int v, double weight) {
  if (u < 0 || v < 0 || u >= num_nodes_ || v >= num_nodes_) {
    throw std::invalid_argument("ImageGraph::add_edge: node id out of range");
  }
  if (u == v) {
    throw std::invalid_argument("ImageGraph::add_edge: self loop");
  }
  if (u > v) std::swap(u, v);
  if (present_[u][v]) {
    throw std::invalid_argument("ImageGraph::add_edge: duplicate edge (" +
                                std::to_string(u) + "," + std::to_string(v) +
                                ")");
  }
  present_[u][v] = true;
  edges_.push_back({u, v, weight});
}

bool ImageGraph::has_edge(int u, int v) const {
  if (u < 0 || v < 0 || u >= num_nodes_ || v >= num_nodes_ || u == v) {
    return false;
  }
  if (u > v) std::swap(u, v);
  return present_[u][v];
}

std::vector<std::vector<int>> ImageGraph::adjacency() const {
  std::vector<std::vector<int>> adj(num_nodes_);
  for (const WeightedEdge& e : edges_) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
  return adj;
}

DisjointSet::DisjointSet(int n) : parent_(n), rank_(n, 0), components_(n) {
  if (n < 0) throw std::invalid_argument("DisjointSet: negative size");
  for (int i = 0; i < n; ++i) parent_[i] = i;
}

int DisjointSet::find(int x) {
  int root = x;
  while (parent_[root] != root) root = parent_[root];
  while (parent_[x] != root) {
    int next = parent_[x];
    parent_[x] = root;
    x = next;
  }
  return root;
}

bool DisjointSet::unite(int x, int y) {
  int rx = find(x);
  int ry = find(y);
  if (rx == ry) return false;
  if (rank_[rx] < rank_[ry]) std::swap(rx, ry);
  parent_[ry] = rx;
  if (rank_[rx] == rank_[ry]) ++rank_[rx];
  --components_;
  return true;
}

HopDistanceMatrix::HopDistanceMatrix(int size)
    : size_(size),
      dist_(static_cast<std::size_t>(size) * size, kUnreachable) {
  for (int i = 0; i < size; ++i) set(i, i, 0);
}

void HopDistanceMatrix::set(int i, int j, std::int32_t d) {
  dist_[index(i, j)] = d;
  dist_[index(j, i)] = d;
}

std::vector<WeightedEdge> kruskal_mst(const ImageGraph& graph) {
  std::vector<WeightedEdge> sorted = graph.edges();
  std::sort(sorted.begin(), sorted.end(),
            [](const WeightedEdge& a, const WeightedEdge& b) {
              if (a.weight != b.weight) return a.weight < b.weight;
              if (a.u != b.u) return a.u < b.u;
              return a.v < b.v;
            });

  std::vector<WeightedEdge> tree;
  DisjointSet components(graph.num_nodes());
  for (const WeightedEdge& e : sorted) {
    if (components.unite(e.u, e.v)) {
      tree.push_back(e);
      if (components.components() == 1) break;
    }
  }
  return tree;
}

std::vector<std::int32_t> bfs_hop_distances(const ImageGraph& graph,
                                            int source) {
  const int n = graph.num_nodes();
  if (source < 0 || source >= n) {
    throw std::invalid_argument("bfs_hop_distances: source out of range");
  }
  const auto adj = graph.adjacency();
  std::vector<std::int32_t> dist(n, kUnreachable);
  dist[source] = 0;
  std::queue<int> frontier;
  frontier.push(source);
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : adj[u]) {
      if (dist[v] == kUnreachable) {
        dist[v] = dist[u] + 1;
        frontier.push(v);
      }
    }
  }
  return dist;
}

namespace {

void bfs_rows(const std::vector<std::vector<int>>& adj, int begin, int end,
              HopDistanceMatrix* out) {
  const int n = static_cast<int>(adj.size());
  std::vector<std::int32_t> dist(n);
  std::vector<int> queue_buf(n);
  for (int s = begin; s < end; ++s) {
    std::fill(dist.begin(), dist.end(), kUnreachable);
    dist[s] = 0;
    int head = 0, tail = 0;
    queue_buf[tail++] = s;
    while (head < tail) {
      const int u = queue_buf[head++];
      for (int v : adj[u]) {
        if (dist[v] == kUnreachable) {
          dist[v] = dist[u] + 1;
          queue_buf[tail++] = v;
        }
      }
    }
    for (int t = 0; t < n; ++t) out->set(s, t, dist[t]);
  }
}

}  // namespace

HopDistanceMatrix all_pairs_hop_distances(const ImageGraph& graph,
                                          int threads) {
  const int n = graph.num_nodes();
  HopDistanceMatrix result(n);
  if (n == 0) return result;
  const auto adj = graph.adjacency();

  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    bfs_rows(adj, 0, n, &result);
    return result;
  }
  // Each worker owns a disjoint row range, so the result does not depend on
  // the schedule.
  std::vector<std::thread> workers;
  const int chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int begin = t * chunk;
    const int end = std::min(n, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back(bfs_rows, std::cref(adj), begin, end, &result);
  }
  for (auto& w : workers) w.join();
  return result;
}

std::int32_t graph_diameter(const HopDistanceMatrix& distances) {
  std::int32_t diameter = 0;
  const int n = distances.size();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const std::int32_t d = distances.at(i, j);
      if (d == kUnreachable) return kUnreachable;
      diameter = std::max(diameter, d);
    }
  }
  return diameter;
}

bool is_connected(const ImageGraph& graph) {
  return count_components(graph) <= 1;
}

int count_components(const ImageGraph& graph) {
  DisjointSet components(graph.num_nodes());
  for (const WeightedEdge& e : graph.edges()) components.unite(e.u, e.v);
  return components.components();
}

}  // namespace posegraph
