#pragma once

#include <stdexcept>
#include <string>

namespace ridgepde {

enum class ErrorKind {
  InvalidArgument,
  UnsupportedDerivative,
  UnsupportedDomain,
  NumericError,
  CoefficientViolation,
  RankDeficient,
  DegenerateDictionary,
  Usage,
};

const char* to_string(ErrorKind kind) noexcept;

/// Exception carrying a machine-checkable error category.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ridgepde
