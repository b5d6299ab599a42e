#include "posegraph/matrix_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "posegraph/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "matrix payloads assume a little-endian host");

namespace posegraph {

namespace {

bool has_whitespace(const std::string& s) {
  for (const char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') return true;
  }
  return false;
}

}  // namespace

NamedScoreMatrix read_score_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open matrix file: " + path.string());

  std::string line;
  if (!std::getline(in, line) || line != "pgmatrix 1") {
    throw FormatError("bad magic in matrix file: " + path.string());
  }
  NamedScoreMatrix result;
  int n = -1;
  int masked_flag = -1;
  bool ended = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "end") {
      ended = true;
      break;
    }
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    if (key == "size") {
      if (!(fields >> n) || n < 0) {
        throw FormatError("bad size line in matrix file: " + path.string());
      }
    } else if (key == "masked") {
      if (!(fields >> masked_flag) ||
          (masked_flag != 0 && masked_flag != 1)) {
        throw FormatError("bad masked line in matrix file: " + path.string());
      }
    } else if (key == "name") {
      std::string name;
      if (!(fields >> name)) {
        throw FormatError("bad name line in matrix file: " + path.string());
      }
      result.names.push_back(std::move(name));
    } else {
      throw FormatError("unknown header line in matrix file: " +
                        path.string());
    }
  }
  if (!ended) {
    throw FormatError("missing end marker in matrix file: " + path.string());
  }
  if (n < 0 || masked_flag < 0) {
    throw FormatError("incomplete header in matrix file: " + path.string());
  }
  if (static_cast<int>(result.names.size()) != n) {
    throw FormatError("manifest length does not match size in matrix file: " +
                      path.string());
  }

  result.scores = ScoreMatrix(n);
  const std::size_t count = static_cast<std::size_t>(n) * (n - 1) / 2;
  std::vector<float> payload(count);
  if (count > 0) {
    in.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(count * sizeof(float)));
    if (static_cast<std::size_t>(in.gcount()) != count * sizeof(float)) {
      throw FormatError("truncated payload in matrix file: " + path.string());
    }
  }
  char extra;
  if (in.read(&extra, 1)) {
    throw FormatError("trailing bytes in matrix file: " + path.string());
  }
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++idx) {
      const float v = payload[idx];
      if (!std::isnan(v)) {
        if (v < 0.0f || v > 1.0f) {
          throw FormatError("score outside [0,1] in matrix file: " +
                            path.string());
        }
        result.scores.set(i, j, v);
      }
    }
  }
  return result;
}

void write_score_matrix(const std::filesystem::path& path,
                        const NamedScoreMatrix& matrix) {
  const int n = matrix.scores.size();
  if (static_cast<int>(matrix.names.size()) != n) {
    throw std::invalid_argument(
        "write_score_matrix: manifest length does not match matrix size");
  }
  for (const std::string& name : matrix.names) {
    if (name.empty() || has_whitespace(name)) {
      throw std::invalid_argument(
          "write_score_matrix: image names must be non-empty and "
          "whitespace-free");
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write matrix file: " + path.string());
  out << "pgmatrix 1\n";
  out << "size " << n << "\n";
  out << "masked " << (matrix.scores.any_masked_pair() ? 1 : 0) << "\n";
  for (const std::string& name : matrix.names) {
    out << "name " << name << "\n";
  }
  out << "end\n";
  const float canonical_nan = std::numeric_limits<float>::quiet_NaN();
  std::vector<float> payload;
  payload.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      payload.push_back(matrix.scores.masked(i, j)
                            ? canonical_nan
                            : static_cast<float>(matrix.scores.at(i, j)));
    }
  }
  if (!payload.empty()) {
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(float)));
  }
  if (!out) throw FormatError("failed writing matrix file: " + path.string());
}

}  // namespace posegraph
