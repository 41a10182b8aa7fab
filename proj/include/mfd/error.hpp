#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mfd {

enum class ErrorCode {
  InvalidArgument,
  ParseError,
  DuplicatePoints,
  DegenerateInput,
  EmptySources,
  UncoveredComponent,
  DegreeTooLow,
  NonMonotoneControls,
  UncoveredSample,
  UnresolvedSupportViolation,
  EmptyDomain,
  InsertionBudgetExceeded,
  IsolatedVirtualHandle,
  NonConvergence,
  NonRigidRealTransform,
  DegenerateBlend,
  MissingTransform,
  NonRigid,
  StaleWeights,
  UnknownSession,
  UnknownRequest,
};

std::string_view to_string(ErrorCode code);

// Every module error is reported through this type; the code is what the
// CLI and session protocol surface to callers.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mfd
