#include "dephasim/error.hpp"

namespace dephasim {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::NonPositiveFrequency: return "NonPositiveFrequency";
        case ErrorCode::NegativeTemperature: return "NegativeTemperature";
        case ErrorCode::CutoffOrderViolation: return "CutoffOrderViolation";
        case ErrorCode::NonHermitian: return "NonHermitian";
        case ErrorCode::TraceNotOne: return "TraceNotOne";
        case ErrorCode::NotPositiveSemidefinite: return "NotPositiveSemidefinite";
        case ErrorCode::EmptyGrid: return "EmptyGrid";
        case ErrorCode::NonMonotonicGrid: return "NonMonotonicGrid";
        case ErrorCode::NonPositiveRatio: return "NonPositiveRatio";
        case ErrorCode::NotPeriodicReport: return "NotPeriodicReport";
        case ErrorCode::ToleranceNotMet: return "ToleranceNotMet";
        case ErrorCode::DimensionBudgetExceeded: return "DimensionBudgetExceeded";
        case ErrorCode::TruncationInadequate: return "TruncationInadequate";
        case ErrorCode::NoOffDiagonalSupport: return "NoOffDiagonalSupport";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::EmptySeries: return "EmptySeries";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

bool is_numerical_failure(ErrorCode code) noexcept {
    return code == ErrorCode::ToleranceNotMet || code == ErrorCode::TruncationInadequate;
}

namespace {

std::string join(const ValidationReport& violations) {
    std::string out;
    for (const auto& v : violations) {
        if (!out.empty()) out += "; ";
        out += to_string(v.code);
        out += ": ";
        out += v.message;
    }
    return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      violations_{{code, message}} {}

Error::Error(ValidationReport violations)
    : std::runtime_error(join(violations)),
      code_(violations.empty() ? ErrorCode::InvalidArgument : violations.front().code),
      violations_(std::move(violations)) {}

}  // namespace dephasim
