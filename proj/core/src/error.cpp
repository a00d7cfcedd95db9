#include "lrpca/error.hpp"

namespace lrpca {

std::string_view ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidDimensions: return "InvalidDimensions";
    case ErrorCode::kInvalidRank: return "InvalidRank";
    case ErrorCode::kConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::kSingularGram: return "SingularGram";
    case ErrorCode::kInvalidThreshold: return "InvalidThreshold";
    case ErrorCode::kInvalidFraction: return "InvalidFraction";
    case ErrorCode::kMissingGroundTruth: return "MissingGroundTruth";
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kTrainingDiverged: return "TrainingDiverged";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace lrpca
