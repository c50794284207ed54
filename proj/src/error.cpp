#include "lbse/error.hpp"

namespace lbse {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedHeader: return "E_MALFORMED_HEADER";
    case ErrorCode::DimensionMismatch: return "E_DIMENSION_MISMATCH";
    case ErrorCode::NonFiniteValue: return "E_NONFINITE_VALUE";
    case ErrorCode::LabelOutOfRange: return "E_LABEL_OUT_OF_RANGE";
    case ErrorCode::DegenerateSplit: return "E_DEGENERATE_SPLIT";
    case ErrorCode::IndexOutOfRange: return "E_INDEX_OUT_OF_RANGE";
    case ErrorCode::ConfigViolation: return "E_CONFIG_VIOLATION";
    case ErrorCode::SvdFailure: return "E_SVD_FAILURE";
    case ErrorCode::RankDegeneracy: return "E_RANK_DEGENERACY";
    case ErrorCode::SingularSystem: return "E_SINGULAR_SYSTEM";
    case ErrorCode::LengthMismatch: return "E_LENGTH_MISMATCH";
    case ErrorCode::EmptyIndex: return "E_EMPTY_INDEX";
    case ErrorCode::IoError: return "E_IO_ERROR";
  }
  return "E_UNKNOWN";
}

LbseError::LbseError(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) {
  throw LbseError(code, message);
}

}  // namespace lbse
