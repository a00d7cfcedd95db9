#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lrpca {

enum class ErrorCode {
  kInvalidDimensions,
  kInvalidRank,
  kConvergenceFailure,
  kSingularGram,
  kInvalidThreshold,
  kInvalidFraction,
  kMissingGroundTruth,
  kInvalidInput,
  kTrainingDiverged,
  kParseError,
  kFormatError,
  kIoError,
};

std::string_view ToString(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ToString(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lrpca
