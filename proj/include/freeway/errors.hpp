#pragma once

#include <stdexcept>
#include <string>

namespace freeway {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value lies outside the domain of a model function (negative occupancy,
/// supply evaluated beyond jam occupancy, negative metering rate, NaN input).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A topology the requested analysis cannot handle.
class UnsupportedTopology : public DomainError {
public:
    using DomainError::DomainError;
};

/// Invalid construction parameters or scenario configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Caller broke an interface contract (dimension mismatch, malformed signature).
class ContractError : public Error {
public:
    using Error::Error;
};

} // namespace freeway
