#pragma once

#include <stdexcept>
#include <string>

namespace visent {

// Error taxonomy mirrored by the CLI exit codes:
//   UsageError -> 2, FormatError -> 3, ComputeError -> 4, IoError -> 5.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file content. Carries "file:line:" context when known.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  FormatError(const std::string& file, int line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what) {}
};

// Invalid arguments, shape mismatches, undefined metrics.
class ComputeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace visent
