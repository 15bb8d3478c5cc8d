#pragma once

#include <stdexcept>
#include <string>

namespace smoothlab {

enum class ErrorCode {
  InvalidArgument,
  InvalidModel,
  Io,
  NotPrimitive,
  ZeroColumn,
  SingularDirection,
  NoSingletonBranch,
  FurstenbergKestenViolated,
  NoConvergence,
  NotFound,
  BudgetExceeded,
  OutOfRange,
  NegativeInput,
  InsufficientDecay,
  EmptyTail,
  SupercriticalBlowup,
  MomentRangeExceeded,
  NotScalarReducible,
};

const char* to_string(ErrorCode code) noexcept;

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

}  // namespace smoothlab
