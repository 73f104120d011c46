#pragma once

#include <stdexcept>
#include <string>

namespace xc1d {

// Categories double as process exit codes for the command line tool.
enum class ErrorCategory : int {
  kConfig = 1,
  kData = 2,
  kNumeric = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorCategory::kConfig, what) {}
};

/// Raised by tensor primitives and layers when operand shapes disagree.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what)
      : Error(ErrorCategory::kConfig, what) {}
};

/// Misuse of the autodiff API (non-scalar root, consumed graph, ...).
class GraphError : public Error {
 public:
  explicit GraphError(const std::string& what)
      : Error(ErrorCategory::kConfig, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what)
      : Error(ErrorCategory::kData, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorCategory::kNumeric, what) {}
};

}  // namespace xc1d
