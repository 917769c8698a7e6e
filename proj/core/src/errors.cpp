#include "eldiff/errors.hpp"

namespace eldiff {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonZeroMean: return "NonZeroMean";
    case ErrorCode::LambdaZero: return "LambdaZero";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::NonPositiveZ: return "NonPositiveZ";
    case ErrorCode::BlowUp: return "BlowUp";
    case ErrorCode::NegativeDensity: return "NegativeDensity";
    case ErrorCode::MisalignedSnapshots: return "MisalignedSnapshots";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::ModeOutOfBand: return "ModeOutOfBand";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace eldiff
