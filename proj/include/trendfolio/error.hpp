#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trendfolio {

enum class ErrorCode {
    // ingestion / panel
    MalformedRow,
    EmptySeries,
    DuplicateDate,
    NoBenchmarkCoverage,
    ExcessiveGaps,
    DateOutsideCalendar,
    LookAhead,
    UnknownAsset,
    // returns / signals
    MisalignedSeries,
    SeriesTooShort,
    NonPositiveGrowthFactor,
    WindowExceedsSeries,
    WindowTooSmall,
    DegenerateMean,
    NoEligibleAssets,
    EmptyRow,
    // portfolio / backtest
    StartOutsideCalendar,
    ConfigUniverseUnavailable,
    InsufficientHistory,
    CalendarMismatch,
    // analytics
    ZeroVolatility,
    ZeroDownside,
    ZeroDrawdown,
    ZeroTrackingError,
    // cli
    InvalidConfig,
    MissingResultFiles,
    Io,
};

/// Coarse failure class, used by the CLI to pick an exit status.
enum class ErrorClass { Config, Data, Runtime };

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::DuplicateDate: return "DuplicateDate";
    case ErrorCode::NoBenchmarkCoverage: return "NoBenchmarkCoverage";
    case ErrorCode::ExcessiveGaps: return "ExcessiveGaps";
    case ErrorCode::DateOutsideCalendar: return "DateOutsideCalendar";
    case ErrorCode::LookAhead: return "LookAhead";
    case ErrorCode::UnknownAsset: return "UnknownAsset";
    case ErrorCode::MisalignedSeries: return "MisalignedSeries";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::NonPositiveGrowthFactor: return "NonPositiveGrowthFactor";
    case ErrorCode::WindowExceedsSeries: return "WindowExceedsSeries";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::DegenerateMean: return "DegenerateMean";
    case ErrorCode::NoEligibleAssets: return "NoEligibleAssets";
    case ErrorCode::EmptyRow: return "EmptyRow";
    case ErrorCode::StartOutsideCalendar: return "StartOutsideCalendar";
    case ErrorCode::ConfigUniverseUnavailable: return "ConfigUniverseUnavailable";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::CalendarMismatch: return "CalendarMismatch";
    case ErrorCode::ZeroVolatility: return "ZeroVolatility";
    case ErrorCode::ZeroDownside: return "ZeroDownside";
    case ErrorCode::ZeroDrawdown: return "ZeroDrawdown";
    case ErrorCode::ZeroTrackingError: return "ZeroTrackingError";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::MissingResultFiles: return "MissingResultFiles";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

inline ErrorClass error_class(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::ConfigUniverseUnavailable:
        return ErrorClass::Config;
    case ErrorCode::MalformedRow:
    case ErrorCode::EmptySeries:
    case ErrorCode::DuplicateDate:
    case ErrorCode::NoBenchmarkCoverage:
    case ErrorCode::ExcessiveGaps:
    case ErrorCode::UnknownAsset:
    case ErrorCode::MissingResultFiles:
    case ErrorCode::Io:
        return ErrorClass::Data;
    default:
        return ErrorClass::Runtime;
    }
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what) {}

    ErrorCode code() const noexcept { return code_; }
    ErrorClass error_class() const noexcept { return trendfolio::error_class(code_); }
    /// The message without the code prefix.
    const std::string& message() const noexcept { return message_; }

private:
    ErrorCode code_;
    std::string message_;
};

} // namespace trendfolio
