#include "ltest/error.hpp"

namespace ltest {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::BadGroupSize: return "BadGroupSize";
        case ErrorCode::DegenerateResidual: return "DegenerateResidual";
        case ErrorCode::NotConverged: return "NotConverged";
        case ErrorCode::NullDirection: return "NullDirection";
        case ErrorCode::ZeroInput: return "ZeroInput";
        case ErrorCode::SingularGradient: return "SingularGradient";
        case ErrorCode::BadRegime: return "BadRegime";
        case ErrorCode::BadLevel: return "BadLevel";
        case ErrorCode::BadArgument: return "BadArgument";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::ColumnConflict: return "ColumnConflict";
        case ErrorCode::NonNumeric: return "NonNumeric";
        case ErrorCode::TooFewRows: return "TooFewRows";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace ltest
