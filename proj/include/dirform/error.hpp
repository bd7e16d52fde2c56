#ifndef DIRFORM_ERROR_HPP
#define DIRFORM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace dirform {

enum class ErrorCode {
    invalid_argument,
    parse,
    index_mismatch,
    unknown_vertex,
    duplicate_edge,
    disconnected,
    precondition,
    solver_failure,
    internal,
};

inline const char* to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::parse: return "parse";
    case ErrorCode::index_mismatch: return "index_mismatch";
    case ErrorCode::unknown_vertex: return "unknown_vertex";
    case ErrorCode::duplicate_edge: return "duplicate_edge";
    case ErrorCode::disconnected: return "disconnected";
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::solver_failure: return "solver_failure";
    case ErrorCode::internal: return "internal";
    }
    return "unknown";
}

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto an exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace dirform

#endif
