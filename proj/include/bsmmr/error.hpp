#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bsmmr {

enum class ErrorCode {
  DimensionMismatch,
  ObservationOutOfBox,
  BadHyperparameter,
  TrialsMissing,
  InvalidBox,
  InvalidGraph,
  OutOfDomain,
  CapacityExceeded,
  MonotoneViolation,
  EmptySubprocess,
  DomainNotCovered,
  EmptyChain,
  TooFewObservations,
  SingularCovariance,
  Config,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct Issue {
  ErrorCode code;
  std::string message;
};

/// Raised by validate_problem; lists every violated invariant, not only the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Issue> issues);

  const std::vector<Issue>& issues() const noexcept { return issues_; }

 private:
  std::vector<Issue> issues_;
};

}  // namespace bsmmr
