#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace msfilter {

enum class ErrorCode {
  kDimensionMismatch,
  kNonStochastic,
  kReducibleChain,
  kAbsorbingRegime,
  kSingularInnovation,
  kLyapunovDivergence,
  kUnderflow,
  kCapExceeded,
  kMissingRetention,
  kZeroNormalizer,
  kInvalidArgument,
  kIo,
  kParse,
};

/// Stable upper-case identifier used in machine-readable CLI errors.
std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace msfilter
