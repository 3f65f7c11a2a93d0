#pragma once

#include <stdexcept>
#include <string>

namespace compart_h2 {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  NotSchur,
  SingularSystem,
  EigenFailure,
  InfeasiblePoint,
  InfeasibleStart,
  LineSearchFailed,
  PhaseOneFailed,
  AssumptionViolated,
  IterationDiverged,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so the
// C API can translate it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace compart_h2
