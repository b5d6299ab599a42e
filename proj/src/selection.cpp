#include "posegraph/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "posegraph/error.hpp"

namespace posegraph {

namespace {

constexpr double kNegativeInfinity = -std::numeric_limits<double>::infinity();

struct Candidate {
  int u = 0;
  int v = 0;
  double rank = 0.0;
  double score = 0.0;
};

// Marks every candidate edge lying in the top-`limit` ranked partners of at
// least one endpoint. Partner ties break on the smaller node id.
std::vector<std::vector<bool>> top_candidate_mask(
    const ScoreMatrix& ranks, const std::vector<Candidate>& candidates,
    int limit) {
  const int n = ranks.size();
  std::vector<std::vector<std::pair<double, int>>> partners(n);
  for (const Candidate& c : candidates) {
    partners[c.u].emplace_back(c.rank, c.v);
    partners[c.v].emplace_back(c.rank, c.u);
  }
  std::vector<std::vector<bool>> eligible(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; ++i) {
    auto& list = partners[i];
    std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    const int take = std::min<int>(limit, static_cast<int>(list.size()));
    for (int t = 0; t < take; ++t) {
      const int j = list[t].second;
      eligible[i][j] = true;
      eligible[j][i] = true;
    }
  }
  return eligible;
}

void sort_by_score(std::vector<Candidate>* candidates) {
  std::sort(candidates->begin(), candidates->end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.score != b.score) return a.score > b.score;
              if (a.rank != b.rank) return a.rank > b.rank;
              if (a.u != b.u) return a.u < b.u;
              return a.v < b.v;
            });
}

void sort_by_rank(std::vector<Candidate>* candidates) {
  std::sort(candidates->begin(), candidates->end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.rank != b.rank) return a.rank > b.rank;
              if (a.u != b.u) return a.u < b.u;
              return a.v < b.v;
            });
}

}  // namespace

void SelectionConfig::validate() const {
  if (k < 1) throw std::invalid_argument("SelectionConfig: k must be >= 1");
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("SelectionConfig: lambda must be in [0,1]");
  }
  if (top_candidates < 1) {
    throw std::invalid_argument("SelectionConfig: top_candidates must be >= 1");
  }
  if (!(rank_threshold >= 0.0 && rank_threshold <= 1.0)) {
    throw std::invalid_argument(
        "SelectionConfig: rank_threshold must be in [0,1]");
  }
}

ImageGraph PoseGraphInit::to_graph() const {
  ImageGraph graph(num_nodes);
  for (const SelectedEdge& e : edges) {
    graph.add_edge(e.u, e.v, e.score_at_selection);
  }
  return graph;
}

Eigen::MatrixXd normalize_distances(const HopDistanceMatrix& distances) {
  const int n = distances.size();
  const std::int32_t diameter = graph_diameter(distances);
  Eigen::MatrixXd out(n, n);
  if (diameter == kUnreachable || diameter == 0) {
    out.setOnes();
    return out;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out(i, j) = static_cast<double>(distances.at(i, j)) / diameter;
    }
  }
  return out;
}

ModulatedScores modulate_scores(const ScoreMatrix& ranks,
                                const Eigen::MatrixXd& normalized_dist,
                                const SelectionConfig& config,
                                const std::vector<std::pair<int, int>>& selected,
                                bool apply_threshold, int iteration) {
  config.validate();
  const int n = ranks.size();
  if (normalized_dist.rows() != n || normalized_dist.cols() != n) {
    throw std::invalid_argument(
        "modulate_scores: distance matrix dimension mismatch");
  }

  std::vector<std::vector<bool>> is_selected(n, std::vector<bool>(n, false));
  for (const auto& [u, v] : selected) {
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw std::invalid_argument("modulate_scores: selected edge out of range");
    }
    is_selected[u][v] = true;
    is_selected[v][u] = true;
  }

  std::vector<Candidate> candidates;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (ranks.masked(i, j) || is_selected[i][j]) continue;
      candidates.push_back({i, j, ranks.at(i, j), 0.0});
    }
  }
  const auto eligible =
      top_candidate_mask(ranks, candidates, config.top_candidates);

  ModulatedScores result;
  result.iteration = iteration;
  result.values.setConstant(n, n, std::numeric_limits<double>::quiet_NaN());
  for (const Candidate& c : candidates) {
    if (apply_threshold && c.rank < config.rank_threshold) continue;
    double s = c.rank;
    if (config.modulation_enabled && eligible[c.u][c.v]) {
      s = (1.0 - config.lambda) * c.rank +
          config.lambda * normalized_dist(c.u, c.v);
    }
    result.values(c.u, c.v) = s;
    result.values(c.v, c.u) = s;
  }
  for (const auto& [u, v] : selected) {
    result.values(u, v) = kNegativeInfinity;
    result.values(v, u) = kNegativeInfinity;
  }
  return result;
}

MultiMstResult build_multi_mst(const ScoreMatrix& ranks,
                               const SelectionConfig& config) {
  config.validate();
  const int n = ranks.size();
  if (n < 2) {
    throw std::invalid_argument("build_multi_mst: need at least 2 nodes");
  }

  MultiMstResult result;
  result.graph.num_nodes = n;
  result.report.num_nodes = n;
  result.report.config = config;

  // owner(i,j): 0 while unselected, otherwise the 1-based tree holding the
  // pair. Edge exchanges move pairs between trees, so membership lives here
  // rather than in per-iteration locals.
  std::vector<std::vector<int>> owner(n, std::vector<int>(n, 0));
  std::vector<std::vector<double>> chosen_score(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<std::pair<int, int>>> trees(config.k + 1);

  const auto assign = [&](int u, int v, int tree, double score) {
    owner[u][v] = owner[v][u] = tree;
    chosen_score[u][v] = chosen_score[v][u] = score;
    trees[tree].emplace_back(u, v);
  };
  const auto unassign = [&](int u, int v) {
    auto& list = trees[owner[u][v]];
    list.erase(std::find(list.begin(), list.end(), std::make_pair(u, v)));
    owner[u][v] = owner[v][u] = 0;
  };
  const auto union_graph = [&]() {
    ImageGraph g(n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (owner[i][j] > 0) g.add_edge(i, j, 1.0 - chosen_score[i][j]);
      }
    }
    return g;
  };
  // Components of tree `t` once (eu,ev) is removed.
  const auto split_sides = [&](int t, int eu, int ev) {
    DisjointSet ds(n);
    for (const auto& [a, b] : trees[t]) {
      if (a == eu && b == ev) continue;
      ds.unite(a, b);
    }
    return ds;
  };
  const auto rank_order = [&](std::vector<std::pair<int, int>>* pairs) {
    std::sort(pairs->begin(), pairs->end(),
              [&](const std::pair<int, int>& a, const std::pair<int, int>& b) {
                const double ra = ranks.at(a.first, a.second);
                const double rb = ranks.at(b.first, b.second);
                if (ra != rb) return ra > rb;
                return a < b;
              });
  };

  for (int m = 1; m <= config.k; ++m) {
    std::vector<Candidate> candidates;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (ranks.masked(i, j) || owner[i][j] != 0) continue;
        candidates.push_back({i, j, ranks.at(i, j), 0.0});
      }
    }
    if (candidates.empty()) {
      result.report.warnings.push_back(
          "tree " + std::to_string(m) +
          ": no unselected candidate edges remain; stopping early");
      break;
    }

    const bool modulate =
        config.modulation_enabled && m >= 2;
    if (modulate) {
      const HopDistanceMatrix dist = all_pairs_hop_distances(union_graph());
      Eigen::MatrixXd dmat;
      if (config.distance_normalization_enabled) {
        dmat = normalize_distances(dist);
      } else {
        // Raw hop counts; disconnected pairs count as farther than any
        // finite hop distance.
        dmat.resize(n, n);
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            const std::int32_t d = dist.at(i, j);
            dmat(i, j) = d == kUnreachable ? static_cast<double>(n)
                                           : static_cast<double>(d);
          }
        }
      }
      const auto eligible =
          top_candidate_mask(ranks, candidates, config.top_candidates);
      for (Candidate& c : candidates) {
        c.score = eligible[c.u][c.v]
                      ? (1.0 - config.lambda) * c.rank +
                            config.lambda * dmat(c.u, c.v)
                      : c.rank;
      }
    } else {
      // Before the first tree every pair is equally distant, so modulation
      // reduces to a uniform rescaling and the raw ranks decide.
      for (Candidate& c : candidates) c.score = c.rank;
    }

    const bool apply_threshold =
        config.rank_threshold > 0.0 &&
        (m >= 2 || config.threshold_first_tree);
    std::vector<Candidate> survivors;
    std::vector<Candidate> pruned;
    for (const Candidate& c : candidates) {
      if (apply_threshold && c.rank < config.rank_threshold) {
        pruned.push_back(c);
      } else {
        survivors.push_back(c);
      }
    }

    // Spanning pass on weights 1 - s: highest modulated score first, ties by
    // higher raw rank then canonical pair.
    sort_by_score(&survivors);
    DisjointSet components(n);
    for (const Candidate& c : survivors) {
      if (components.unite(c.u, c.v)) {
        assign(c.u, c.v, m, c.score);
        if (components.components() == 1) break;
      }
    }

    // Pruning is not allowed to break connectivity: re-admit the strongest
    // discarded edges until the tree can complete.
    int readmitted = 0;
    if (components.components() > 1 && !pruned.empty()) {
      sort_by_rank(&pruned);
      for (const Candidate& c : pruned) {
        if (components.components() == 1) break;
        if (components.unite(c.u, c.v)) {
          assign(c.u, c.v, m, c.rank);
          ++readmitted;
          std::ostringstream warning;
          warning << "tree " << m << ": re-admitted pruned edge (" << c.u
                  << "," << c.v << ") with rank " << c.rank
                  << " to keep the union connected";
          result.report.warnings.push_back(warning.str());
        }
      }
    }

    // Exchange completion: when every remaining candidate across the cut is
    // already held by an earlier tree, pull one over and repair the donor
    // with an unused candidate, chaining through intermediate trees when a
    // single swap does not suffice. Keeps all trees spanning and disjoint.
    enum class Exchange { kGrew, kMutated, kStuck };
    const auto try_exchange = [&]() -> Exchange {
      // Aborted chains can leave unused candidates across the cut; take the
      // strongest directly.
      std::vector<std::pair<int, int>> direct;
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          if (ranks.masked(i, j) || owner[i][j] != 0) continue;
          if (components.find(i) != components.find(j)) direct.emplace_back(i, j);
        }
      }
      if (!direct.empty()) {
        rank_order(&direct);
        const auto [u, v] = direct.front();
        components.unite(u, v);
        assign(u, v, m, ranks.at(u, v));
        return Exchange::kGrew;
      }

      struct Move {
        int u, v, tree, parent;
      };
      std::vector<Move> search;
      std::vector<std::vector<bool>> visited(n, std::vector<bool>(n, false));
      std::vector<std::pair<int, int>> roots;
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          if (ranks.masked(i, j)) continue;
          if (owner[i][j] == 0 || owner[i][j] == m) continue;
          if (components.find(i) != components.find(j)) roots.emplace_back(i, j);
        }
      }
      rank_order(&roots);
      for (const auto& [u, v] : roots) {
        visited[u][v] = visited[v][u] = true;
        search.push_back({u, v, owner[u][v], -1});
      }

      for (std::size_t head = 0; head < search.size(); ++head) {
        const Move mv = search[head];
        DisjointSet sides = split_sides(mv.tree, mv.u, mv.v);
        const int su = sides.find(mv.u);
        const int sv = sides.find(mv.v);
        std::vector<std::pair<int, int>> unused_repairs;
        std::vector<std::pair<int, int>> held_repairs;
        for (int i = 0; i < n; ++i) {
          for (int j = i + 1; j < n; ++j) {
            if (ranks.masked(i, j) || (i == mv.u && j == mv.v)) continue;
            const int fa = sides.find(i);
            const int fb = sides.find(j);
            if (!((fa == su && fb == sv) || (fa == sv && fb == su))) continue;
            if (owner[i][j] == 0) {
              unused_repairs.emplace_back(i, j);
            } else if (owner[i][j] != m && owner[i][j] != mv.tree &&
                       !visited[i][j]) {
              held_repairs.emplace_back(i, j);
            }
          }
        }
        if (!unused_repairs.empty()) {
          rank_order(&unused_repairs);
          // Walk the chain from the donor of the unused repair back to the
          // root, re-validating every swap against the current trees.
          std::vector<std::size_t> chain;
          for (std::size_t at = head; ; at = static_cast<std::size_t>(search[at].parent)) {
            chain.push_back(at);
            if (search[at].parent < 0) break;
          }
          std::pair<int, int> incoming = unused_repairs.front();
          bool applied_any = false;
          for (const std::size_t idx : chain) {
            const Move& step = search[idx];
            if (owner[step.u][step.v] != step.tree) {
              return applied_any ? Exchange::kMutated : Exchange::kStuck;
            }
            DisjointSet fresh = split_sides(step.tree, step.u, step.v);
            const int a = fresh.find(step.u);
            const int b = fresh.find(step.v);
            const int fa = fresh.find(incoming.first);
            const int fb = fresh.find(incoming.second);
            if (!((fa == a && fb == b) || (fa == b && fb == a))) {
              return applied_any ? Exchange::kMutated : Exchange::kStuck;
            }
            unassign(step.u, step.v);
            assign(incoming.first, incoming.second, step.tree,
                   ranks.at(incoming.first, incoming.second));
            applied_any = true;
            incoming = {step.u, step.v};
          }
          if (components.find(incoming.first) ==
              components.find(incoming.second)) {
            return Exchange::kMutated;
          }
          components.unite(incoming.first, incoming.second);
          assign(incoming.first, incoming.second, m,
                 ranks.at(incoming.first, incoming.second));
          std::ostringstream warning;
          warning << "tree " << m << ": moved edge (" << incoming.first << ","
                  << incoming.second << ") out of tree " << search[chain.back()].tree
                  << " via " << chain.size() << " swap(s) to keep growing";
          result.report.warnings.push_back(warning.str());
          return Exchange::kGrew;
        }
        rank_order(&held_repairs);
        for (const auto& [a, b] : held_repairs) {
          visited[a][b] = visited[b][a] = true;
          search.push_back({a, b, owner[a][b], static_cast<int>(head)});
        }
      }
      return Exchange::kStuck;
    };

    int stalls = 0;
    while (components.components() > 1 && stalls < 20 * n) {
      const Exchange outcome = try_exchange();
      if (outcome == Exchange::kStuck) break;
      if (outcome == Exchange::kGrew) {
        stalls = 0;
      } else {
        ++stalls;
      }
    }

    if (components.components() > 1) {
      result.report.warnings.push_back(
          "tree " + std::to_string(m) +
          ": candidate graph is disconnected; emitted a maximal forest");
    }

    TreeStats stats;
    stats.mst_index = m;
    stats.edges_added = static_cast<int>(trees[m].size());
    stats.readmitted = readmitted;
    stats.union_diameter =
        graph_diameter(all_pairs_hop_distances(union_graph()));
    result.report.iterations.push_back(stats);
  }

  for (int m = 1; m <= config.k; ++m) {
    std::sort(trees[m].begin(), trees[m].end());
    for (const auto& [u, v] : trees[m]) {
      result.graph.edges.push_back({u, v, m, chosen_score[u][v]});
    }
  }
  return result;
}

std::vector<std::pair<int, int>> knn_select(const ScoreMatrix& ranks, int k) {
  const int n = ranks.size();
  if (k < 1 || k >= n) {
    throw std::invalid_argument("knn_select: k must satisfy 1 <= k < N");
  }
  std::vector<std::vector<bool>> chosen(n, std::vector<bool>(n, false));
  std::vector<std::pair<double, int>> partners;
  for (int i = 0; i < n; ++i) {
    partners.clear();
    for (int j = 0; j < n; ++j) {
      if (j == i || ranks.masked(i, j)) continue;
      partners.emplace_back(ranks.at(i, j), j);
    }
    std::sort(partners.begin(), partners.end(),
              [](const auto& a, const auto& b) {
                if (a.first != b.first) return a.first > b.first;
                return a.second < b.second;
              });
    const int take = std::min<int>(k, static_cast<int>(partners.size()));
    for (int t = 0; t < take; ++t) {
      const int j = partners[t].second;
      chosen[std::min(i, j)][std::max(i, j)] = true;
    }
  }
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (chosen[i][j]) edges.emplace_back(i, j);
    }
  }
  return edges;
}

namespace {

void check_manifest(std::size_t expected, const std::vector<std::string>& names,
                    const char* where) {
  if (names.size() != expected) {
    throw std::invalid_argument(std::string(where) +
                                ": manifest size does not match node count");
  }
}

}  // namespace

std::string emit_pair_list(const PoseGraphInit& init,
                           const std::vector<std::string>& names) {
  check_manifest(static_cast<std::size_t>(init.num_nodes), names,
                 "emit_pair_list");
  std::vector<SelectedEdge> ordered = init.edges;
  std::sort(ordered.begin(), ordered.end(),
            [](const SelectedEdge& a, const SelectedEdge& b) {
              if (a.mst_index != b.mst_index) return a.mst_index < b.mst_index;
              if (a.u != b.u) return a.u < b.u;
              return a.v < b.v;
            });
  std::string out;
  for (const SelectedEdge& e : ordered) {
    out += names[e.u];
    out += ' ';
    out += names[e.v];
    out += '\n';
  }
  return out;
}

std::string emit_pair_list(const std::vector<std::pair<int, int>>& edges,
                           const std::vector<std::string>& names) {
  std::vector<std::pair<int, int>> ordered;
  ordered.reserve(edges.size());
  for (const auto& [u, v] : edges) {
    ordered.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(ordered.begin(), ordered.end());
  std::string out;
  for (const auto& [u, v] : ordered) {
    if (u < 0 || v >= static_cast<int>(names.size())) {
      throw std::invalid_argument("emit_pair_list: edge outside manifest");
    }
    out += names[u];
    out += ' ';
    out += names[v];
    out += '\n';
  }
  return out;
}

std::vector<std::pair<int, int>> parse_pair_list(
    const std::string& text, const std::vector<std::string>& names) {
  std::unordered_map<std::string, int> ids;
  for (std::size_t i = 0; i < names.size(); ++i) {
    ids[names[i]] = static_cast<int>(i);
  }
  std::vector<std::pair<int, int>> edges;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string a, b, extra;
    fields >> a >> b;
    if (a.empty() || b.empty() || (fields >> extra)) {
      throw FormatError("pair list line " + std::to_string(line_no) +
                        " is not 'nameA nameB'");
    }
    const auto ia = ids.find(a);
    const auto ib = ids.find(b);
    if (ia == ids.end() || ib == ids.end()) {
      throw FormatError("pair list line " + std::to_string(line_no) +
                        " references an unknown image: " +
                        (ia == ids.end() ? a : b));
    }
    if (ia->second == ib->second) {
      throw FormatError("pair list line " + std::to_string(line_no) +
                        " pairs an image with itself");
    }
    edges.emplace_back(std::min(ia->second, ib->second),
                       std::max(ia->second, ib->second));
  }
  return edges;
}

}  // namespace posegraph
