#include "posegraph/score_matrix.hpp"

#include <stdexcept>
#include <string>

namespace posegraph {

ScoreMatrix::ScoreMatrix(int size)
    : size_(size),
      values_(static_cast<std::size_t>(size) * size, kMasked) {
  if (size < 0) throw std::invalid_argument("ScoreMatrix: negative size");
}

std::size_t ScoreMatrix::index(int i, int j) const {
  return static_cast<std::size_t>(i) * size_ + j;
}

void ScoreMatrix::check_pair(int i, int j) const {
  if (i < 0 || j < 0 || i >= size_ || j >= size_) {
    throw std::invalid_argument("ScoreMatrix: index out of range");
  }
  if (i == j) {
    throw std::invalid_argument("ScoreMatrix: diagonal entries stay masked");
  }
}

void ScoreMatrix::set(int i, int j, double value) {
  check_pair(i, j);
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument("ScoreMatrix: value outside [0,1]: " +
                                std::to_string(value));
  }
  values_[index(i, j)] = value;
  values_[index(j, i)] = value;
}

void ScoreMatrix::mask(int i, int j) {
  check_pair(i, j);
  values_[index(i, j)] = kMasked;
  values_[index(j, i)] = kMasked;
}

int ScoreMatrix::count_unmasked_pairs() const {
  int count = 0;
  for (int i = 0; i < size_; ++i) {
    for (int j = i + 1; j < size_; ++j) {
      if (!masked(i, j)) ++count;
    }
  }
  return count;
}

bool ScoreMatrix::any_masked_pair() const {
  for (int i = 0; i < size_; ++i) {
    for (int j = i + 1; j < size_; ++j) {
      if (masked(i, j)) return true;
    }
  }
  return false;
}

}  // namespace posegraph
