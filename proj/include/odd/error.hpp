#pragma once

#include <stdexcept>
#include <string>

namespace odd {

/// Base class for every error thrown by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid parameters, dimensions, or configuration detected before any computation.
struct ConfigError : Error {
    using Error::Error;
};

struct InvalidParams : ConfigError {
    using ConfigError::ConfigError;
};

struct InvalidFraction : ConfigError {
    using ConfigError::ConfigError;
};

struct DimMismatch : ConfigError {
    using ConfigError::ConfigError;
};

struct UnsupportedModel : ConfigError {
    using ConfigError::ConfigError;
};

struct EmptySamples : ConfigError {
    using ConfigError::ConfigError;
};

struct EmptyDataset : ConfigError {
    using ConfigError::ConfigError;
};

struct ZeroVector : ConfigError {
    using ConfigError::ConfigError;
};

struct InsufficientCheckpoints : ConfigError {
    using ConfigError::ConfigError;
};

struct DegenerateOutput : ConfigError {
    using ConfigError::ConfigError;
};

/// Numerical failures: the computation started but could not complete.
struct NumericalError : Error {
    using Error::Error;
};

struct NotPositiveDefinite : NumericalError {
    using NumericalError::NumericalError;
};

struct NoConvergence : NumericalError {
    using NumericalError::NumericalError;
};

struct NotSeparable : NumericalError {
    using NumericalError::NumericalError;
};

/// File I/O and format errors.
struct IoError : Error {
    using Error::Error;
};

struct ParseError : IoError {
    using IoError::IoError;
};

struct SchemaError : IoError {
    using IoError::IoError;
};

}  // namespace odd
