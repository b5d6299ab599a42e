#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace posegraph {

// Named row-major float32 tensor inside a container file.
struct Tensor {
  std::string name;
  std::vector<std::int64_t> shape;
  std::vector<float> data;

  std::int64_t element_count() const;
};

// On-disk container: a text header
//
//   pgtensors 1
//   meta <key> <value...>            (zero or more)
//   name <entry-name>                (zero or more, ordered manifest)
//   tensor <name> f32 <rank> <d0> ... <dk>
//   end
//
// followed by the raw little-endian float32 payloads in manifest order,
// row-major. Tensor and manifest names must be whitespace-free.
struct TensorFile {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> names;
  std::vector<Tensor> tensors;

  const Tensor* find(std::string_view name) const;
  // Throws FormatError naming the tensor when absent.
  const Tensor& require(std::string_view name) const;
  void add(std::string name, std::vector<std::int64_t> shape,
           std::vector<float> data);
};

TensorFile read_tensor_file(const std::filesystem::path& path);
void write_tensor_file(const std::filesystem::path& path,
                       const TensorFile& file);

// Image embeddings: one [d] tensor per manifest name, in manifest order.
struct EmbeddingSet {
  std::vector<std::string> names;
  // One column per image, `dim` rows.
  Eigen::MatrixXd values;
};

EmbeddingSet read_embeddings(const std::filesystem::path& path);
void write_embeddings(const std::filesystem::path& path,
                      const EmbeddingSet& embeddings);

}  // namespace posegraph
