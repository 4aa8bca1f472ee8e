#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dephasim {

enum class ErrorCode {
    InvalidArgument,
    NonPositiveFrequency,
    NegativeTemperature,
    CutoffOrderViolation,
    NonHermitian,
    TraceNotOne,
    NotPositiveSemidefinite,
    EmptyGrid,
    NonMonotonicGrid,
    NonPositiveRatio,
    NotPeriodicReport,
    ToleranceNotMet,
    DimensionBudgetExceeded,
    TruncationInadequate,
    NoOffDiagonalSupport,
    GridMismatch,
    EmptySeries,
    ConfigError,
    IoError,
};

const char* to_string(ErrorCode code) noexcept;

// ToleranceNotMet and TruncationInadequate; everything else is an input problem.
bool is_numerical_failure(ErrorCode code) noexcept;

struct Violation {
    ErrorCode code;
    std::string message;
    bool operator==(const Violation&) const = default;
};

using ValidationReport = std::vector<Violation>;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);
    explicit Error(ValidationReport violations);

    ErrorCode code() const noexcept { return code_; }
    const ValidationReport& violations() const noexcept { return violations_; }

private:
    ErrorCode code_;
    ValidationReport violations_;
};

}  // namespace dephasim
