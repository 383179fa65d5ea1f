#pragma once

#include <stdexcept>
#include <string>

namespace ppm {

// Base of every exception the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid parameters or preconditions supplied by the caller.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed input data (CSV parse problems, bad outcome values, ...).
class DataError : public Error {
public:
    using Error::Error;
};

// A measure is undefined for the given predictions (single class, zero
// variance, ...). Callers that aggregate over folds catch this and exclude.
class MeasureError : public Error {
public:
    using Error::Error;
};

// Iterative numerics failed to produce a usable answer.
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace ppm
