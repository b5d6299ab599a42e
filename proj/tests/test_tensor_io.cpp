#include <cstdint>
#include <vector>

#include "doctest.h"
#include "posegraph/error.hpp"
#include "posegraph/tensor_io.hpp"
#include "support/temp_dir.hpp"

using namespace posegraph;
using testsupport::TempDir;

namespace {

TensorFile sample_file() {
  TensorFile file;
  file.meta.emplace_back("rounds", "2");
  file.meta.emplace_back("note", "unit test fixture");
  file.names = {"img_a.jpg", "img_b.jpg"};
  file.add("alpha", {2, 3}, {1.0f, 2.0f, 3.0f, 4.0f, 5.0f, 6.0f});
  file.add("beta", {4}, {0.5f, -0.25f, 0.0f, 9.0f});
  return file;
}

}  // namespace

TEST_CASE("tensor container round trip is byte identical") {
  TempDir dir;
  auto path = dir.file("weights.pgt");
  write_tensor_file(path, sample_file());
  auto first = testsupport::read_file_bytes(path);

  auto loaded = read_tensor_file(path);
  REQUIRE(loaded.tensors.size() == 2);
  CHECK(loaded.meta == sample_file().meta);
  CHECK(loaded.names == sample_file().names);
  CHECK(loaded.tensors[0].name == "alpha");
  CHECK(loaded.tensors[0].shape == std::vector<std::int64_t>{2, 3});
  CHECK(loaded.tensors[0].data == sample_file().tensors[0].data);
  CHECK(loaded.tensors[1].element_count() == 4);

  auto copy = dir.file("copy.pgt");
  write_tensor_file(copy, loaded);
  CHECK(testsupport::read_file_bytes(copy) == first);
}

TEST_CASE("tensor lookup distinguishes find and require") {
  auto file = sample_file();
  CHECK(file.find("alpha") != nullptr);
  CHECK(file.find("missing") == nullptr);
  CHECK(file.require("beta").name == "beta");
  CHECK_THROWS_AS(file.require("missing"), FormatError);
  CHECK_THROWS_WITH_AS(file.require("gamma"),
                       doctest::Contains("gamma"), FormatError);
}

TEST_CASE("tensor container rejects malformed headers") {
  TempDir dir;
  auto path = dir.file("weights.pgt");
  write_tensor_file(path, sample_file());
  auto bytes = testsupport::read_file_bytes(path);

  SUBCASE("bad magic") {
    bytes[0] = 'x';
    testsupport::write_file_bytes(path, bytes);
    CHECK_THROWS_AS(read_tensor_file(path), FormatError);
  }
  SUBCASE("truncated payload") {
    bytes.resize(bytes.size() - 5);
    testsupport::write_file_bytes(path, bytes);
    CHECK_THROWS_AS(read_tensor_file(path), FormatError);
  }
  SUBCASE("trailing bytes") {
    bytes.push_back('\0');
    testsupport::write_file_bytes(path, bytes);
    CHECK_THROWS_AS(read_tensor_file(path), FormatError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_tensor_file(dir.file("nope.pgt")), FormatError);
  }
}

TEST_CASE("tensor container rejects inconsistent declarations") {
  TempDir dir;
  TensorFile file;
  CHECK_THROWS_AS(file.add("bad", {2}, {1.0f}), FormatError);

  file.add("dup", {1}, {1.0f});
  file.add("with space", {1}, {2.0f});
  CHECK_THROWS_AS(write_tensor_file(dir.file("bad.pgt"), file), FormatError);

  TensorFile duplicated;
  duplicated.add("dup", {1}, {1.0f});
  duplicated.tensors.push_back(duplicated.tensors[0]);
  auto path = dir.file("dup.pgt");
  write_tensor_file(path, duplicated);
  CHECK_THROWS_WITH_AS(read_tensor_file(path), doctest::Contains("dup"),
                       FormatError);
}

TEST_CASE("embedding round trip preserves manifest order and values") {
  TempDir dir;
  EmbeddingSet set;
  set.names = {"c.jpg", "a.jpg", "b.jpg"};
  set.values.resize(4, 3);
  set.values << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12;

  auto path = dir.file("embeddings.pgt");
  write_embeddings(path, set);
  auto loaded = read_embeddings(path);
  CHECK(loaded.names == set.names);
  REQUIRE(loaded.values.rows() == 4);
  REQUIRE(loaded.values.cols() == 3);
  // float32 payload: integer values survive exactly
  CHECK(loaded.values == set.values);
}

TEST_CASE("embedding reader rejects dimension drift") {
  TempDir dir;
  TensorFile raw;
  raw.names = {"a.jpg", "b.jpg"};
  raw.add("a.jpg", {3}, {1.0f, 2.0f, 3.0f});
  raw.add("b.jpg", {2}, {1.0f, 2.0f});
  auto path = dir.file("bad.pgt");
  write_tensor_file(path, raw);
  CHECK_THROWS_AS(read_embeddings(path), FormatError);
}

TEST_CASE("embedding reader requires a tensor per manifest entry") {
  TempDir dir;
  TensorFile raw;
  raw.names = {"a.jpg", "b.jpg"};
  raw.add("a.jpg", {3}, {1.0f, 2.0f, 3.0f});
  auto path = dir.file("short.pgt");
  write_tensor_file(path, raw);
  CHECK_THROWS_WITH_AS(read_embeddings(path), doctest::Contains("b.jpg"),
                       FormatError);
}
