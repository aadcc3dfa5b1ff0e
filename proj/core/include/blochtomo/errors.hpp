// errors.hpp — error taxonomy shared by every blochtomo module

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace blochtomo {

enum class ErrorCode {
    EPSingular,          // (E, n) chart undefined at an exceptional point
    ScalarOperator,      // operator proportional to identity, n undefined
    DegenerateOperator,  // det u = 0, cannot gauge-normalize
    ZeroVector,
    ZeroOperator,
    ZeroMatrix,
    DarkInput,           // a normalization pair is fully extinguished
    GeometryError,
    GridError,
    NotConverged,
    NoConvergence,
    NotAnEP,             // diabolic point: both off-diagonals vanish
    InvalidReading,
    OutOfDomain,
    ConfigError,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace blochtomo
