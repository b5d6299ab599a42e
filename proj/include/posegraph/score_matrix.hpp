#pragma once

#include <cmath>
#include <limits>
#include <vector>

namespace posegraph {

// Symmetric N x N matrix of edge scores in [0, 1]. Masked entries (the
// diagonal, pruned pairs, pairs never predicted) carry a NaN sentinel and are
// excluded from every selection algorithm.
class ScoreMatrix {
 public:
  static constexpr double kMasked = std::numeric_limits<double>::quiet_NaN();

  ScoreMatrix() = default;
  explicit ScoreMatrix(int size);

  int size() const { return size_; }

  double at(int i, int j) const { return values_[index(i, j)]; }
  bool masked(int i, int j) const { return std::isnan(at(i, j)); }

  // Writes both (i,j) and (j,i). Rejects the diagonal, out-of-range ids and
  // values outside [0, 1].
  void set(int i, int j, double value);
  void mask(int i, int j);

  int count_unmasked_pairs() const;
  bool any_masked_pair() const;

 private:
  std::size_t index(int i, int j) const;
  void check_pair(int i, int j) const;

  int size_ = 0;
  std::vector<double> values_;
};

}  // namespace posegraph
