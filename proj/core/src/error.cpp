#include "lle/error.hpp"

namespace lle {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::UnsupportedOrder: return "unsupported-order";
    case ErrorCode::SingularJacobian: return "singular-jacobian";
    case ErrorCode::MaxIterations: return "max-iterations";
    case ErrorCode::EigenSolverFailure: return "eigen-solver-failure";
    case ErrorCode::AmbiguousTracking: return "ambiguous-tracking";
    case ErrorCode::AssumptionsNotMet: return "assumptions-not-met";
    case ErrorCode::BlowUp: return "blow-up";
    case ErrorCode::TrackingJump: return "tracking-jump";
    case ErrorCode::NoConvergence: return "no-convergence";
    case ErrorCode::SingularDenominator: return "singular-denominator";
    case ErrorCode::InsufficientData: return "insufficient-data";
    case ErrorCode::StructuralFailure: return "structural-failure";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

bool is_numeric(ErrorCode code) noexcept {
  return code != ErrorCode::InvalidArgument && code != ErrorCode::Io &&
         code != ErrorCode::UnsupportedOrder;
}

}  // namespace lle
