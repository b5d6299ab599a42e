#include "posegraph/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "posegraph/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "tensor containers assume a little-endian host");

namespace posegraph {

namespace {

constexpr std::string_view kMagic = "pgtensors";
constexpr int kVersion = 1;

bool valid_name(const std::string& name) {
  if (name.empty()) return false;
  return std::none_of(name.begin(), name.end(),
                      [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::int64_t Tensor::element_count() const {
  std::int64_t count = 1;
  for (std::int64_t d : shape) count *= d;
  return count;
}

const Tensor* TensorFile::find(std::string_view name) const {
  for (const Tensor& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const Tensor& TensorFile::require(std::string_view name) const {
  const Tensor* t = find(name);
  if (t == nullptr) {
    throw FormatError("missing tensor: " + std::string(name));
  }
  return *t;
}

void TensorFile::add(std::string name, std::vector<std::int64_t> shape,
                     std::vector<float> data) {
  Tensor t{std::move(name), std::move(shape), std::move(data)};
  if (t.element_count() != static_cast<std::int64_t>(t.data.size())) {
    throw FormatError("tensor data does not match shape: " + t.name);
  }
  tensors.push_back(std::move(t));
}

TensorFile read_tensor_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open tensor file: " + path.string());

  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError("empty tensor file: " + path.string());
  }
  {
    std::istringstream header(line);
    std::string magic;
    int version = 0;
    header >> magic >> version;
    if (magic != kMagic) {
      throw FormatError("bad magic in tensor file: " + path.string());
    }
    if (version != kVersion) {
      throw FormatError("unsupported tensor file version " +
                        std::to_string(version));
    }
  }

  TensorFile file;
  bool saw_end = false;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string keyword;
    fields >> keyword;
    if (keyword.empty()) continue;
    if (keyword == "end") {
      saw_end = true;
      break;
    }
    if (keyword == "meta") {
      std::string key;
      fields >> key;
      std::string value;
      std::getline(fields, value);
      if (!value.empty() && value.front() == ' ') value.erase(0, 1);
      if (key.empty()) throw FormatError("malformed meta line: " + line);
      file.meta.emplace_back(key, value);
    } else if (keyword == "name") {
      std::string name;
      fields >> name;
      if (!valid_name(name)) throw FormatError("malformed name line: " + line);
      file.names.push_back(name);
    } else if (keyword == "tensor") {
      Tensor t;
      std::string dtype;
      int rank = 0;
      fields >> t.name >> dtype >> rank;
      if (!valid_name(t.name) || fields.fail()) {
        throw FormatError("malformed tensor line: " + line);
      }
      if (dtype != "f32") {
        throw FormatError("unsupported scalar type '" + dtype +
                          "' for tensor " + t.name);
      }
      if (rank < 0 || rank > 8) {
        throw FormatError("bad tensor rank for " + t.name);
      }
      for (int i = 0; i < rank; ++i) {
        std::int64_t dim = 0;
        fields >> dim;
        if (fields.fail() || dim <= 0) {
          throw FormatError("bad dimensions for tensor " + t.name);
        }
        t.shape.push_back(dim);
      }
      file.tensors.push_back(std::move(t));
    } else {
      throw FormatError("unknown header keyword '" + keyword + "' in " +
                        path.string());
    }
  }
  if (!saw_end) {
    throw FormatError("tensor header missing 'end': " + path.string());
  }

  std::unordered_set<std::string> seen;
  for (const Tensor& t : file.tensors) {
    if (!seen.insert(t.name).second) {
      throw FormatError("duplicate tensor: " + t.name);
    }
  }

  for (Tensor& t : file.tensors) {
    t.data.resize(static_cast<std::size_t>(t.element_count()));
    in.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    if (in.gcount() !=
        static_cast<std::streamsize>(t.data.size() * sizeof(float))) {
      throw FormatError("truncated tensor: " + t.name);
    }
  }
  char extra;
  if (in.read(&extra, 1)) {
    throw FormatError("trailing bytes in tensor file: " + path.string());
  }
  return file;
}

void write_tensor_file(const std::filesystem::path& path,
                       const TensorFile& file) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write tensor file: " + path.string());

  out << kMagic << ' ' << kVersion << '\n';
  for (const auto& [key, value] : file.meta) {
    out << "meta " << key << ' ' << value << '\n';
  }
  for (const std::string& name : file.names) {
    if (!valid_name(name)) throw FormatError("invalid manifest name: " + name);
    out << "name " << name << '\n';
  }
  for (const Tensor& t : file.tensors) {
    if (!valid_name(t.name)) throw FormatError("invalid tensor name: " + t.name);
    if (t.element_count() != static_cast<std::int64_t>(t.data.size())) {
      throw FormatError("tensor data does not match shape: " + t.name);
    }
    out << "tensor " << t.name << " f32 " << t.shape.size();
    for (std::int64_t d : t.shape) out << ' ' << d;
    out << '\n';
  }
  out << "end\n";
  for (const Tensor& t : file.tensors) {
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(float)));
  }
  if (!out) throw FormatError("failed writing tensor file: " + path.string());
}

EmbeddingSet read_embeddings(const std::filesystem::path& path) {
  const TensorFile file = read_tensor_file(path);
  if (file.names.empty()) {
    throw FormatError("embedding file has an empty image manifest: " +
                      path.string());
  }
  std::unordered_set<std::string> seen;
  for (const std::string& name : file.names) {
    if (!seen.insert(name).second) {
      throw FormatError("duplicate image name in manifest: " + name);
    }
  }

  const Tensor& first = file.require(file.names.front());
  if (first.shape.size() != 1) {
    throw FormatError("embedding tensor is not a vector: " + first.name);
  }
  const std::int64_t dim = first.shape[0];

  EmbeddingSet set;
  set.names = file.names;
  set.values.resize(dim, static_cast<std::int64_t>(file.names.size()));
  for (std::size_t i = 0; i < file.names.size(); ++i) {
    const Tensor& t = file.require(file.names[i]);
    if (t.shape.size() != 1 || t.shape[0] != dim) {
      throw FormatError("embedding dimension mismatch for tensor " + t.name);
    }
    for (std::int64_t r = 0; r < dim; ++r) {
      set.values(r, static_cast<std::int64_t>(i)) = t.data[r];
    }
  }
  return set;
}

void write_embeddings(const std::filesystem::path& path,
                      const EmbeddingSet& embeddings) {
  if (static_cast<std::int64_t>(embeddings.names.size()) !=
      embeddings.values.cols()) {
    throw FormatError("embedding manifest size does not match value columns");
  }
  TensorFile file;
  file.names = embeddings.names;
  const std::int64_t dim = embeddings.values.rows();
  for (std::size_t i = 0; i < embeddings.names.size(); ++i) {
    std::vector<float> data(dim);
    for (std::int64_t r = 0; r < dim; ++r) {
      data[r] =
          static_cast<float>(embeddings.values(r, static_cast<std::int64_t>(i)));
    }
    file.add(embeddings.names[i], {dim}, std::move(data));
  }
  write_tensor_file(path, file);
}

}  // namespace posegraph
