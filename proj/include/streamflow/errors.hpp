#pragma once

#include <stdexcept>
#include <string>

namespace streamflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (bad flags, bad config file).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input data problems: missing files, schema drift, malformed CSV, bad dates.
class DataError : public Error {
public:
    using Error::Error;
};

/// Static attribute table disagrees with the configured schema.
class SchemaError : public DataError {
public:
    using DataError::DataError;
};

/// Tensor or window dimension mismatch. `dimension()` names the offender.
class ShapeError : public Error {
public:
    ShapeError(std::string dimension, std::size_t expected, std::size_t actual);

    const std::string& dimension() const noexcept { return dimension_; }
    std::size_t expected() const noexcept { return expected_; }
    std::size_t actual() const noexcept { return actual_; }

private:
    std::string dimension_;
    std::size_t expected_;
    std::size_t actual_;
};

/// Non-finite values reached a numerical routine (loss, gradient, input).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Training loss became non-finite.
class DivergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A variance-based metric was asked to normalise by zero observed variance.
class DegenerateVarianceError : public Error {
public:
    using Error::Error;
};

/// Fewer observations than a metric or fit requires.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

}  // namespace streamflow
