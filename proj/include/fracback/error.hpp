#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fracback {

enum class ErrorKind {
    InvalidArgument,
    NumericalFailure,
    UnsupportedSize,
    UnsupportedDomain,
    IllPosedDivision,
    CgNoConvergence,
    ParameterOutOfRange,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Exception carrying a machine-readable category next to the message.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid-argument";
        case ErrorKind::NumericalFailure: return "numerical-failure";
        case ErrorKind::UnsupportedSize: return "unsupported-size";
        case ErrorKind::UnsupportedDomain: return "unsupported-domain";
        case ErrorKind::IllPosedDivision: return "ill-posed-division";
        case ErrorKind::CgNoConvergence: return "cg-no-convergence";
        case ErrorKind::ParameterOutOfRange: return "parameter-out-of-range";
    }
    return "unknown";
}

inline void require(bool condition, ErrorKind kind, const std::string& what) {
    if (!condition) throw Error(kind, what);
}

}  // namespace fracback
