#include "smoothlab/error.hpp"

namespace smoothlab {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::Io: return "Io";
    case ErrorCode::NotPrimitive: return "NotPrimitive";
    case ErrorCode::ZeroColumn: return "ZeroColumn";
    case ErrorCode::SingularDirection: return "SingularDirection";
    case ErrorCode::NoSingletonBranch: return "NoSingletonBranch";
    case ErrorCode::FurstenbergKestenViolated: return "FurstenbergKestenViolated";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NegativeInput: return "NegativeInput";
    case ErrorCode::InsufficientDecay: return "InsufficientDecay";
    case ErrorCode::EmptyTail: return "EmptyTail";
    case ErrorCode::SupercriticalBlowup: return "SupercriticalBlowup";
    case ErrorCode::MomentRangeExceeded: return "MomentRangeExceeded";
    case ErrorCode::NotScalarReducible: return "NotScalarReducible";
  }
  return "Unknown";
}

}  // namespace smoothlab
