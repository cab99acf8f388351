#pragma once

#include <stdexcept>
#include <string>

namespace margins {

// Error taxonomy for the whole toolkit. Every throwing operation documents
// which codes it can raise; callers that need to branch on the cause should
// catch margins::Error and switch on code() rather than parsing messages.
enum class ErrorCode {
  NonSquare,
  NegativeWeight,
  NonzeroDiagonal,
  DimensionMismatch,
  NoStabilizingGain,
  AssumptionViolation,
  NearPole,
  GridTooCoarse,
  Infeasible,
  NoCertifiedGlobal,
  UnsupportedDimension,
  SingularInput,
  NonUnitaryBasis,
  DegenerateSpan,
  InnerProductNotPositive,
  InnerProductNotReal,
  NotPositiveDefinite,
  StepTooLarge,
  HorizonTooShort,
  ConfigParse,
  Io,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace margins
