#pragma once

#include <stdexcept>
#include <string>

namespace posegraph {

// Raised when an on-disk container (tensor file, matrix file, pose file,
// pair list) is malformed or internally inconsistent.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace posegraph
