#include <Eigen/Core>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "posegraph/error.hpp"
#include "posegraph/gnn.hpp"
#include "support/reference.hpp"
#include "support/temp_dir.hpp"

using namespace posegraph;
using testsupport::TempDir;

namespace {

Eigen::MatrixXd random_embeddings(std::mt19937_64& rng, int dim, int n) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd out(dim, n);
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < dim; ++r) {
      out(r, c) = gauss(rng);
    }
  }
  return out;
}

std::vector<std::vector<double>> columns_of(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> out(m.cols());
  for (int c = 0; c < m.cols(); ++c) {
    out[c].assign(m.col(c).data(), m.col(c).data() + m.rows());
  }
  return out;
}

}  // namespace

TEST_CASE("cosine similarity hand cases") {
  Eigen::VectorXd a(2), b(2), c(2);
  a << 1.0, 0.0;
  b << 1.0, 0.0;
  CHECK(cosine_similarity(a, b) == doctest::Approx(1.0));

  b << 0.0, 1.0;
  CHECK(cosine_similarity(a, b) == doctest::Approx(0.0));

  c << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  CHECK(cosine_similarity(a, c) == doctest::Approx(std::sqrt(2.0) / 2.0));
  CHECK(cosine_similarity(c, a) == cosine_similarity(a, c));
}

TEST_CASE("cosine similarity rejects degenerate input") {
  Eigen::VectorXd a(2), zero(2), longer(3);
  a << 1.0, 0.0;
  zero.setZero();
  longer.setOnes();
  CHECK_THROWS_AS(cosine_similarity(a, zero), std::invalid_argument);
  CHECK_THROWS_AS(cosine_similarity(zero, a), std::invalid_argument);
  CHECK_THROWS_AS(cosine_similarity(a, longer), std::invalid_argument);
}

TEST_CASE("initial edge features: zero embeddings with zero bias vanish") {
  auto weights = GnnWeights::random(4, 8, 3);
  weights.edge_init.bias.setZero();
  Eigen::MatrixXd embeddings = Eigen::MatrixXd::Zero(4, 3);
  auto features = init_edge_features(embeddings, weights);
  CHECK(features.cols() == 6);
  CHECK(features.rows() == 8);
  CHECK(features.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("initial edge features are non-negative with one column per pair") {
  std::mt19937_64 rng(11);
  auto weights = GnnWeights::random(6, 12, 5);
  auto embeddings = random_embeddings(rng, 6, 5);
  auto features = init_edge_features(embeddings, weights);
  CHECK(features.cols() == 20);
  CHECK(features.minCoeff() >= 0.0);
}

TEST_CASE("initial edge features reject mismatched embedding dimension") {
  auto weights = GnnWeights::random(4, 8, 3);
  Eigen::MatrixXd wrong = Eigen::MatrixXd::Zero(5, 3);
  CHECK_THROWS_AS(init_edge_features(wrong, weights), FormatError);
}

TEST_CASE("directed pair index enumerates ordered pairs densely") {
  int n = 5;
  std::vector<int> seen(n * (n - 1), 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      int idx = directed_pair_index(i, j, n);
      REQUIRE(idx >= 0);
      REQUIRE(idx < n * (n - 1));
      ++seen[idx];
    }
  }
  CHECK(std::accumulate(seen.begin(), seen.end(), 0) == n * (n - 1));
  for (int count : seen) {
    CHECK(count == 1);
  }
}

TEST_CASE("message pass keeps identical embeddings identical") {
  std::mt19937_64 rng(21);
  auto weights = GnnWeights::random(6, 12, 9);
  Eigen::MatrixXd embeddings(6, 4);
  Eigen::VectorXd column = random_embeddings(rng, 6, 1);
  for (int c = 0; c < 4; ++c) {
    embeddings.col(c) = column;
  }
  auto features = init_edge_features(embeddings, weights);
  auto round = message_pass_round(embeddings, features, weights, 1);
  for (int c = 1; c < 4; ++c) {
    CHECK((round.node_embeddings.col(c) - round.node_embeddings.col(0))
              .cwiseAbs()
              .maxCoeff() == doctest::Approx(0.0));
  }
  CHECK(round.node_embeddings.rows() == 6);
}

TEST_CASE("message pass validates the round index") {
  auto weights = GnnWeights::random(4, 8, 3);
  Eigen::MatrixXd embeddings = Eigen::MatrixXd::Ones(4, 3);
  auto features = init_edge_features(embeddings, weights);
  CHECK_THROWS_AS(message_pass_round(embeddings, features, weights, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(message_pass_round(embeddings, features, weights, 3),
                  std::invalid_argument);
  CHECK_NOTHROW(message_pass_round(embeddings, features, weights, 2));
}

TEST_CASE("rank prediction shape, range and degenerate input") {
  std::mt19937_64 rng(31);
  auto weights = GnnWeights::random(8, 16, 1);
  auto embeddings = random_embeddings(rng, 8, 3);
  auto scores = predict_edge_ranks(embeddings, weights);
  CHECK(scores.size() == 3);
  CHECK(scores.count_unmasked_pairs() == 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      CHECK(scores.at(i, j) >= 0.0);
      CHECK(scores.at(i, j) <= 1.0);
      CHECK(scores.at(i, j) == scores.at(j, i));
    }
  }

  Eigen::MatrixXd lone = random_embeddings(rng, 8, 1);
  CHECK_THROWS_AS(predict_edge_ranks(lone, weights), std::invalid_argument);
}

TEST_CASE("duplicated embeddings produce interchangeable score rows") {
  std::mt19937_64 rng(41);
  auto weights = GnnWeights::random(8, 16, 7);
  Eigen::MatrixXd embeddings = random_embeddings(rng, 8, 5);
  embeddings.col(3) = embeddings.col(1);
  auto scores = predict_edge_ranks(embeddings, weights);
  for (int k = 0; k < 5; ++k) {
    if (k == 1 || k == 3) continue;
    CHECK(scores.at(1, k) == doctest::Approx(scores.at(3, k)).epsilon(1e-12));
  }
}

TEST_CASE("forward pass is deterministic") {
  std::mt19937_64 rng(51);
  auto weights = GnnWeights::random(8, 16, 2);
  auto embeddings = random_embeddings(rng, 8, 6);
  auto first = predict_edge_ranks(embeddings, weights);
  auto second = predict_edge_ranks(embeddings, weights);
  for (int i = 0; i < 6; ++i) {
    for (int j = i + 1; j < 6; ++j) {
      CHECK(first.at(i, j) == second.at(i, j));
    }
  }
}

TEST_CASE("forward pass agrees with the loop reference") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 6; ++trial) {
    int n = 2 + static_cast<int>(rng() % 9);
    int d = 3 + static_cast<int>(rng() % 6);
    int dl = 4 + static_cast<int>(rng() % 8);
    auto weights = GnnWeights::random(d, dl, 100 + trial);
    auto embeddings = random_embeddings(rng, d, n);
    auto scores = predict_edge_ranks(embeddings, weights);
    auto expected = testsupport::loop_gnn_scores(columns_of(embeddings), weights);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        CHECK(scores.at(i, j) ==
              doctest::Approx(expected[i][j]).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("rank prediction is permutation equivariant") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 4; ++trial) {
    int n = 4 + static_cast<int>(rng() % 5);
    auto weights = GnnWeights::random(8, 16, 300 + trial);
    auto embeddings = random_embeddings(rng, 8, n);
    auto base = predict_edge_ranks(embeddings, weights);

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd permuted(8, n);
    for (int c = 0; c < n; ++c) {
      permuted.col(c) = embeddings.col(perm[c]);
    }
    auto mapped = predict_edge_ranks(permuted, weights);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        CHECK(mapped.at(i, j) ==
              doctest::Approx(base.at(perm[i], perm[j])).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("weight save and load round trips bitwise") {
  TempDir dir;
  auto weights = GnnWeights::random(8, 16, 13);
  auto path = dir.file("weights.pgt");
  save_gnn_weights(path, weights);
  auto loaded = load_gnn_weights(path);

  auto original = weights.to_tensor_file();
  auto reloaded = loaded.to_tensor_file();
  REQUIRE(original.tensors.size() == reloaded.tensors.size());
  for (std::size_t t = 0; t < original.tensors.size(); ++t) {
    CHECK(original.tensors[t].name == reloaded.tensors[t].name);
    CHECK(original.tensors[t].shape == reloaded.tensors[t].shape);
    CHECK(original.tensors[t].data == reloaded.tensors[t].data);
  }

  auto copy = dir.file("copy.pgt");
  save_gnn_weights(copy, loaded);
  CHECK(testsupport::read_file_bytes(copy) ==
        testsupport::read_file_bytes(path));
}

TEST_CASE("loaded random weights drive a full forward pass") {
  TempDir dir;
  std::mt19937_64 rng(81);
  auto path = dir.file("weights.pgt");
  save_gnn_weights(path, GnnWeights::random(6, 12, 99));
  auto weights = load_gnn_weights(path);
  auto scores = predict_edge_ranks(random_embeddings(rng, 6, 5), weights);
  CHECK(scores.count_unmasked_pairs() == 10);
}

TEST_CASE("weight loading rejects broken containers") {
  TempDir dir;
  auto weights = GnnWeights::random(6, 12, 5);
  auto path = dir.file("weights.pgt");
  save_gnn_weights(path, weights);

  SUBCASE("missing tensor") {
    auto file = weights.to_tensor_file();
    file.tensors.erase(file.tensors.begin() + 2);
    auto broken = dir.file("missing.pgt");
    write_tensor_file(broken, file);
    CHECK_THROWS_AS(load_gnn_weights(broken), FormatError);
  }
  SUBCASE("shape mismatch names the offending block") {
    auto file = weights.to_tensor_file();
    for (auto& tensor : file.tensors) {
      if (tensor.name == "message.lin1.weight") {
        std::swap(tensor.shape[0], tensor.shape[1]);
      }
    }
    auto broken = dir.file("shape.pgt");
    write_tensor_file(broken, file);
    CHECK_THROWS_WITH_AS(load_gnn_weights(broken),
                         doctest::Contains("weight shape mismatch"),
                         FormatError);
  }
  SUBCASE("truncated payload names the tensor") {
    auto bytes = testsupport::read_file_bytes(path);
    bytes.resize(bytes.size() - 8);
    auto broken = dir.file("trunc.pgt");
    testsupport::write_file_bytes(broken, bytes);
    CHECK_THROWS_WITH_AS(load_gnn_weights(broken),
                         doctest::Contains("truncated"), FormatError);
  }
}
