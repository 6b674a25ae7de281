#include "ridgepde/error.hpp"

namespace ridgepde {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::UnsupportedDerivative: return "unsupported-derivative";
    case ErrorKind::UnsupportedDomain: return "unsupported-domain";
    case ErrorKind::NumericError: return "numeric-error";
    case ErrorKind::CoefficientViolation: return "coefficient-violation";
    case ErrorKind::RankDeficient: return "rank-deficient";
    case ErrorKind::DegenerateDictionary: return "degenerate-dictionary";
    case ErrorKind::Usage: return "usage";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace ridgepde
