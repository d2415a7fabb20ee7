#pragma once

#include <stdexcept>
#include <string>

namespace rnca {

/// Base of every error raised by the library. `exit_code()` is the process
/// status the command-line front end reports for this category.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept = 0;
};

/// Invalid parameter value (count out of range, non-positive regularizer, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

/// Shape mismatch between operands.
class DimensionError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// Two views that must be row-paired have different row counts.
class PairingError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// Not enough samples for the requested statistic.
class StatisticalError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// Data that cannot support the requested model (e.g. a single class).
class DegenerateError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// Malformed CSV or model container.
class FormatError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// Non-finite values or a breakdown inside a numerical routine.
class NumericError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

/// Problem size exceeds a configured cap of an exact (O(n^3)) oracle.
class CapacityError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

namespace detail {

template <class E>
inline void require(bool ok, const std::string& what) {
    if (!ok) throw E(what);
}

}  // namespace detail
}  // namespace rnca
