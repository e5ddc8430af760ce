#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ifs_transit {

enum class ErrorKind {
    dimension_mismatch,
    invalid_argument,
    empty_cloud,
    singular_system,
    non_contractive,
    not_orthogonal,
    not_affine_in_t,
    state_overflow,
    parse_error,
    semantic_error,
    io_error,
};

inline const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::empty_cloud: return "empty_cloud";
    case ErrorKind::singular_system: return "singular_system";
    case ErrorKind::non_contractive: return "non_contractive";
    case ErrorKind::not_orthogonal: return "not_orthogonal";
    case ErrorKind::not_affine_in_t: return "not_affine_in_t";
    case ErrorKind::state_overflow: return "state_overflow";
    case ErrorKind::parse_error: return "parse_error";
    case ErrorKind::semantic_error: return "semantic_error";
    case ErrorKind::io_error: return "io_error";
    }
    return "error";
}

/// Exception carrying a machine-checkable category next to the message.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

inline void require_same_dim(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        fail(ErrorKind::dimension_mismatch,
             std::string(what) + ": dimension " + std::to_string(a) + " vs " + std::to_string(b));
    }
}

} // namespace ifs_transit
