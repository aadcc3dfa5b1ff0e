#include "blochtomo/errors.hpp"

namespace blochtomo {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::EPSingular: return "EPSingular";
        case ErrorCode::ScalarOperator: return "ScalarOperator";
        case ErrorCode::DegenerateOperator: return "DegenerateOperator";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::ZeroOperator: return "ZeroOperator";
        case ErrorCode::ZeroMatrix: return "ZeroMatrix";
        case ErrorCode::DarkInput: return "DarkInput";
        case ErrorCode::GeometryError: return "GeometryError";
        case ErrorCode::GridError: return "GridError";
        case ErrorCode::NotConverged: return "NotConverged";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::NotAnEP: return "NotAnEP";
        case ErrorCode::InvalidReading: return "InvalidReading";
        case ErrorCode::OutOfDomain: return "OutOfDomain";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace blochtomo
