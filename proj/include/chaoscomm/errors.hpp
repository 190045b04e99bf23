#pragma once

#include <stdexcept>
#include <string>

namespace chaoscomm {

// Argument outside the documented domain of an operation.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// State variable overflowed or became NaN during integration.
struct NonFiniteState : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Two guard events fell inside a single integration step; reduce dt.
struct EventMiss : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A symbol stream ended before the requested period index.
struct InsufficientSymbols : std::out_of_range {
    using std::out_of_range::out_of_range;
};

// A delayed lookup reached before the start of the stored signal.
struct CoverageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LengthError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct EmptyTable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularJacobian : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested configuration is outside the family this library models.
struct Unsupported : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace chaoscomm
