#ifndef ADAMFLOW_ERRORS_HPP
#define ADAMFLOW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace adamflow {

// Base for everything thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A constructor or operation precondition was violated by the caller.
class ValidationError : public Error {
public:
    using Error::Error;
};

// An index or query argument fell outside the materialized range.
class OutOfRangeError : public Error {
public:
    using Error::Error;
};

// A parameter left the mathematical domain of a formula.
class DomainError : public Error {
public:
    using Error::Error;
};

// An enumeration or allocation would exceed a hard resource cap.
class CapacityError : public Error {
public:
    using Error::Error;
};

// Not enough data points to evaluate the requested statistic.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

// NaN or infinity appeared mid-computation; message carries the location.
class NonFiniteError : public Error {
public:
    using Error::Error;
};

// An iterative search exhausted its budget; message carries the last iterate.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

// Experiment configuration failed schema validation; `path` is the JSON field.
class ConfigError : public Error {
public:
    ConfigError(std::string path, const std::string& what)
        : Error("config field '" + path + "': " + what), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

}  // namespace adamflow

#endif
