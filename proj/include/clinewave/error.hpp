#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace clinewave {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model or solver parameter lies outside its admissible range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// A function was evaluated outside the range where it is defined.
class RangeError : public Error {
public:
    using Error::Error;
};

/// A grid is malformed or too coarse for the requested discretization.
class GridError : public Error {
public:
    using Error::Error;
};

/// The requested operation does not apply to the regime of the model
/// (e.g. asking for a spreading speed of a population that goes extinct).
class ClassificationError : public Error {
public:
    using Error::Error;
};

/// An iterative solver failed. Carries the last iterate for inspection.
class SolverError : public Error {
public:
    explicit SolverError(const std::string& what, std::vector<double> dump = {})
        : Error(what), dump_(std::move(dump)) {}

    const std::vector<double>& dump() const noexcept { return dump_; }

private:
    std::vector<double> dump_;
};

/// Configuration could not be parsed or failed validation.
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, std::string kind, std::string key = {})
        : Error(what), kind_(std::move(kind)), key_(std::move(key)) {}

    /// "parse" or "validation".
    const std::string& kind() const noexcept { return kind_; }
    /// Offending key for validation errors, empty otherwise.
    const std::string& key() const noexcept { return key_; }

private:
    std::string kind_;
    std::string key_;
};

}  // namespace clinewave
