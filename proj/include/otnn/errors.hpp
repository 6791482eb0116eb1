#pragma once

#include <stdexcept>
#include <string>

namespace otnn {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionError : Error {
    using Error::Error;
};

struct NumericError : Error {
    using Error::Error;
};

struct ConvergenceError : Error {
    using Error::Error;
};

// backward() called with a trace that does not belong to this net/input.
struct StateError : Error {
    using Error::Error;
};

// Batch composition violates a loss precondition (missing class, single-class batch).
struct DegenerateBatchError : Error {
    using Error::Error;
};

struct ArityError : Error {
    using Error::Error;
};

struct DegenerateGradientError : Error {
    using Error::Error;
};

struct UndefinedCorrelationError : Error {
    using Error::Error;
};

// File / JSON parsing.
struct ParseError : Error {
    using Error::Error;
};

// Model file with a format_version we do not read.
struct VersionError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace otnn
