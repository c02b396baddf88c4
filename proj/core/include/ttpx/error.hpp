#pragma once

#include <stdexcept>
#include <string>

namespace ttpx {

enum class ErrorKind {
    Io,            // missing/unreadable files
    Parse,         // malformed input documents
    Validation,    // well-formed input violating a contract (unknown label, bad range)
    NotFound,      // lookup misses
    Contract,      // caller broke a call precondition
    Backend,       // model backend failed or is unavailable
    Incompatible,  // version/layout mismatch between artifacts
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace ttpx
