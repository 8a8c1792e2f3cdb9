#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cmu {

// Every failure raised by the library carries one of these codes. The names
// are part of the external surface: the CLI prints them and the HTTP service
// returns them verbatim in error bodies.
enum class ErrorCode {
    NegativeCount,
    EmptyMatrix,
    SimplexViolation,
    ImproperPosterior,
    TooFewSamples,
    AllSamplesInvalid,
    RoundingInconsistent,
    OutOfRegime,
    TargetUnreachable,
    ParseError,
    InvalidArgument,
    RequestTooLarge,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace cmu
