#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bitraj {

enum class ErrorCode {
  kNotSquare,
  kNotHermitian,
  kNonFinite,
  kDimensionMismatch,
  kUnknownOutcome,
  kCellMismatch,
  kNotFineGrained,
  kInvalidObservable,
  kInvalidSchedule,
  kInvalidState,
  kLengthMismatch,
  kZeroConditioningEvent,
  kEnumerationCapExceeded,
  kPositionOutOfRange,
  kNotPSD,
  kCouplingNonzero,
  kBadSplit,
  kPathCapExceeded,
  kGridMisaligned,
  kBadDimension,
  kIndexOutOfRange,
  kSchemaError,
  kWeightSumError,
  kUnknownCommand,
  kUnknownExperiment,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bitraj
