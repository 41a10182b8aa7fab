#include "mfd/error.hpp"

namespace mfd {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicatePoints: return "DuplicatePoints";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::EmptySources: return "EmptySources";
    case ErrorCode::UncoveredComponent: return "UncoveredComponent";
    case ErrorCode::DegreeTooLow: return "DegreeTooLow";
    case ErrorCode::NonMonotoneControls: return "NonMonotoneControls";
    case ErrorCode::UncoveredSample: return "UncoveredSample";
    case ErrorCode::UnresolvedSupportViolation: return "UnresolvedSupportViolation";
    case ErrorCode::EmptyDomain: return "EmptyDomain";
    case ErrorCode::InsertionBudgetExceeded: return "InsertionBudgetExceeded";
    case ErrorCode::IsolatedVirtualHandle: return "IsolatedVirtualHandle";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::NonRigidRealTransform: return "NonRigidRealTransform";
    case ErrorCode::DegenerateBlend: return "DegenerateBlend";
    case ErrorCode::MissingTransform: return "MissingTransform";
    case ErrorCode::NonRigid: return "NonRigid";
    case ErrorCode::StaleWeights: return "StaleWeights";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::UnknownRequest: return "UnknownRequest";
  }
  return "Unknown";
}

}  // namespace mfd
