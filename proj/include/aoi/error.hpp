#pragma once

#include <stdexcept>
#include <string>

namespace aoi {

enum class ErrorKind {
  InvalidArgument,
  InvalidPattern,
  Infeasible,
  UnboundedAge,
  Domain,
  DegenerateWeights,
  BudgetExceeded,
  Config,
};

const char* to_string(ErrorKind kind);

// Single exception type for the library; callers switch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::InvalidPattern: return "invalid pattern";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::UnboundedAge: return "unbounded age";
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::DegenerateWeights: return "degenerate weights";
    case ErrorKind::BudgetExceeded: return "budget exceeded";
    case ErrorKind::Config: return "config error";
  }
  return "error";
}

}  // namespace aoi
