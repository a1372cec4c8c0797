#pragma once

#include <stdexcept>
#include <string>

namespace psyprobe {

enum class ErrorCode {
  // embedding tables
  DimMismatch,
  NonFinite,
  DuplicateToken,
  EmptyInput,
  ZeroVector,
  AllOutOfVocabulary,
  EmptyTokenList,
  MissingToken,
  // corpora / io
  IoError,
  // embedding training
  EmptyVocabulary,
  DivergedLoss,
  // probing
  AlphaOutOfRange,
  IdenticalCues,
  // curve fitting
  AllOneClass,
  InsufficientAlphas,
  NotConverged,
  TooFewFits,
  // classifier
  SingleClass,
  // sampler
  NonFiniteDensityAtInit,
  DivergentTrajectory,
  TooFewSamples,
  DegenerateVariance,
  // analysis
  RankDeficient,
  GroupTooSmall,
  NoResolvedTokens,
  LengthMismatch,
  InsufficientOverlap,
  // cli
  ConfigError,
};

const char* error_code_name(ErrorCode code);

// Single exception type carrying a typed code; callers match on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace psyprobe
