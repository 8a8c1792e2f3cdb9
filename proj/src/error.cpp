#include "cmu/error.hpp"

namespace cmu {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NegativeCount: return "NegativeCount";
        case ErrorCode::EmptyMatrix: return "EmptyMatrix";
        case ErrorCode::SimplexViolation: return "SimplexViolation";
        case ErrorCode::ImproperPosterior: return "ImproperPosterior";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::AllSamplesInvalid: return "AllSamplesInvalid";
        case ErrorCode::RoundingInconsistent: return "RoundingInconsistent";
        case ErrorCode::OutOfRegime: return "OutOfRegime";
        case ErrorCode::TargetUnreachable: return "TargetUnreachable";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::RequestTooLarge: return "RequestTooLarge";
    }
    return "Unknown";
}

}  // namespace cmu
