#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "posegraph/score_matrix.hpp"

namespace posegraph {

struct NamedScoreMatrix {
  std::vector<std::string> names;
  ScoreMatrix scores;
};

// On-disk symmetric score matrix:
//
//   pgmatrix 1
//   size <N>
//   masked <0|1>
//   name <image-name>        (N lines, manifest order)
//   end
//
// followed by N*(N-1)/2 little-endian float32 values, the upper triangle in
// row-major order. NaN encodes a masked pair; writes emit the canonical quiet
// NaN so identical matrices produce identical bytes. Names must be
// whitespace-free.
NamedScoreMatrix read_score_matrix(const std::filesystem::path& path);
void write_score_matrix(const std::filesystem::path& path,
                        const NamedScoreMatrix& matrix);

}  // namespace posegraph
