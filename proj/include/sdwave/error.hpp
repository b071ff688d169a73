#pragma once

#include <stdexcept>
#include <string>

namespace sdwave {

enum class ErrorKind {
    invalid_mesh,
    shape,
    not_positive_definite,
    singular_matrix,
    evaluation,
    unsupported_input,
    domain,
    invalid_spec,
    configuration,
    degenerate_data,
    parse,
    validation,
    io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI exit path) can branch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::invalid_mesh: return "invalid mesh";
    case ErrorKind::shape: return "shape error";
    case ErrorKind::not_positive_definite: return "not positive definite";
    case ErrorKind::singular_matrix: return "singular matrix";
    case ErrorKind::evaluation: return "evaluation error";
    case ErrorKind::unsupported_input: return "unsupported input";
    case ErrorKind::domain: return "domain error";
    case ErrorKind::invalid_spec: return "invalid noise spec";
    case ErrorKind::configuration: return "configuration error";
    case ErrorKind::degenerate_data: return "degenerate data";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::validation: return "validation error";
    case ErrorKind::io: return "I/O error";
    }
    return "error";
}

} // namespace sdwave
