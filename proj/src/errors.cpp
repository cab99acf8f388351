#include "margins/errors.hpp"

namespace margins {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::NonzeroDiagonal: return "NonzeroDiagonal";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NoStabilizingGain: return "NoStabilizingGain";
    case ErrorCode::AssumptionViolation: return "AssumptionViolation";
    case ErrorCode::NearPole: return "NearPole";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::NoCertifiedGlobal: return "NoCertifiedGlobal";
    case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorCode::SingularInput: return "SingularInput";
    case ErrorCode::NonUnitaryBasis: return "NonUnitaryBasis";
    case ErrorCode::DegenerateSpan: return "DegenerateSpan";
    case ErrorCode::InnerProductNotPositive: return "InnerProductNotPositive";
    case ErrorCode::InnerProductNotReal: return "InnerProductNotReal";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::HorizonTooShort: return "HorizonTooShort";
    case ErrorCode::ConfigParse: return "ConfigParse";
    case ErrorCode::Io: return "Io";
  }
  return "UnknownError";
}

}  // namespace margins
