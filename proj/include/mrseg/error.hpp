#pragma once

#include <stdexcept>
#include <string>

namespace mrseg {

/// Invalid arguments, configuration, or violated data invariants.
/// The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Missing, unreadable, or malformed files. The CLI maps this to exit code 2.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mrseg
