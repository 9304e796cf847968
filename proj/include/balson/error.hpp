#pragma once

#include <stdexcept>
#include <string>

namespace balson {

enum class ErrorKind {
  kInvalidArgument,
  kDimensionMismatch,
  kUnboundedDensity,
  kMomentMatchingDegenerate,
  kModeUndefined,
  kRejectionBudgetExceeded,
  kDegenerateWeight,
  kNonConvergence,
  kNumericalFailure,
  kSparsityUndefined,
  kDegenerateTTest,
  kIo,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kDimensionMismatch: return "dimension mismatch";
    case ErrorKind::kUnboundedDensity: return "unbounded density";
    case ErrorKind::kMomentMatchingDegenerate: return "moment matching degenerate";
    case ErrorKind::kModeUndefined: return "mode undefined";
    case ErrorKind::kRejectionBudgetExceeded: return "rejection budget exceeded";
    case ErrorKind::kDegenerateWeight: return "degenerate weight";
    case ErrorKind::kNonConvergence: return "non-convergence";
    case ErrorKind::kNumericalFailure: return "numerical failure";
    case ErrorKind::kSparsityUndefined: return "sparsity undefined";
    case ErrorKind::kDegenerateTTest: return "degenerate t-test";
    case ErrorKind::kIo: return "i/o failure";
  }
  return "unknown";
}

// Every failure raised by the library carries a kind so callers (the CLI,
// the experiment runner) can classify it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  // the message without the kind prefix
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace balson
