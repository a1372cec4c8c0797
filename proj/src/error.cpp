#include "psyprobe/error.hpp"

namespace psyprobe {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DuplicateToken: return "DuplicateToken";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::AllOutOfVocabulary: return "AllOutOfVocabulary";
    case ErrorCode::EmptyTokenList: return "EmptyTokenList";
    case ErrorCode::MissingToken: return "MissingToken";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::EmptyVocabulary: return "EmptyVocabulary";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
    case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::IdenticalCues: return "IdenticalCues";
    case ErrorCode::AllOneClass: return "AllOneClass";
    case ErrorCode::InsufficientAlphas: return "InsufficientAlphas";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::TooFewFits: return "TooFewFits";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::NonFiniteDensityAtInit: return "NonFiniteDensityAtInit";
    case ErrorCode::DivergentTrajectory: return "DivergentTrajectory";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::GroupTooSmall: return "GroupTooSmall";
    case ErrorCode::NoResolvedTokens: return "NoResolvedTokens";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InsufficientOverlap: return "InsufficientOverlap";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "UnknownError";
}

}  // namespace psyprobe
