#include "msfilter/error.hpp"

namespace msfilter {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::kNonStochastic: return "NON_STOCHASTIC";
    case ErrorCode::kReducibleChain: return "REDUCIBLE_CHAIN";
    case ErrorCode::kAbsorbingRegime: return "ABSORBING_REGIME";
    case ErrorCode::kSingularInnovation: return "SINGULAR_INNOVATION";
    case ErrorCode::kLyapunovDivergence: return "LYAPUNOV_DIVERGENCE";
    case ErrorCode::kUnderflow: return "UNDERFLOW";
    case ErrorCode::kCapExceeded: return "CAP_EXCEEDED";
    case ErrorCode::kMissingRetention: return "MISSING_RETENTION";
    case ErrorCode::kZeroNormalizer: return "ZERO_NORMALIZER";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kIo: return "IO";
    case ErrorCode::kParse: return "PARSE";
  }
  return "UNKNOWN";
}

}  // namespace msfilter
