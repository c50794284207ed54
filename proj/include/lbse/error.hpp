#pragma once

#include <stdexcept>
#include <string>

namespace lbse {

enum class ErrorCode {
  MalformedHeader,
  DimensionMismatch,
  NonFiniteValue,
  LabelOutOfRange,
  DegenerateSplit,
  IndexOutOfRange,
  ConfigViolation,
  SvdFailure,
  RankDegeneracy,
  SingularSystem,
  LengthMismatch,
  EmptyIndex,
  IoError,
};

/// Stable machine-readable code, e.g. "E_MALFORMED_HEADER".
const char* to_string(ErrorCode code) noexcept;

class LbseError : public std::runtime_error {
 public:
  LbseError(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace lbse
