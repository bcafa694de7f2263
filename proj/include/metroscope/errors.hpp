#pragma once

#include <stdexcept>
#include <string>

namespace metroscope {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  TermOverflow,
  TruncationOverflow,
  NoCrossing,
  Divergence,
  NotCovered,
  Internal,
};

/// Library-wide exception carrying a machine-readable error code next to
/// the human-readable message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace metroscope
