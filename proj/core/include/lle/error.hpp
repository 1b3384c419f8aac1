#pragma once

#include <stdexcept>
#include <string>

namespace lle {

enum class ErrorCode {
  InvalidArgument,
  UnsupportedOrder,
  SingularJacobian,
  MaxIterations,
  EigenSolverFailure,
  AmbiguousTracking,
  AssumptionsNotMet,
  BlowUp,
  TrackingJump,
  NoConvergence,
  SingularDenominator,
  InsufficientData,
  StructuralFailure,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

// Numeric failures map to exit status 3 in the CLI; the rest are usage or IO problems.
bool is_numeric(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCode::InvalidArgument, message);
}

}  // namespace lle
