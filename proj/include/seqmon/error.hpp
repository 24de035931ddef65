#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace seqmon {

enum class ErrorCode {
  DimensionMismatch,
  NonSymmetricD,
  NonFinite,
  InvalidParam,
  NoConvergence,
  NotHurwitz,
  SingularSystem,
  NonPositiveThreshold,
  ZeroDrift,
  EmptyEnsemble,
  TooFewSamples,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. `code()` identifies the failure class so callers
/// (notably the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace seqmon
