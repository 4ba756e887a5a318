// Exception hierarchy shared by every module.
#pragma once

#include <stdexcept>
#include <string>

namespace hyperfc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration (unknown keys, out-of-range values).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Numerical breakdown: non-finite values, solver non-convergence, invalid flight regime.
class NumericError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Caller violated an object protocol (e.g. stepping a finished episode).
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// Tensor or vector dimensions do not line up.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Airspeed dropped below the aerodynamic model's validity floor.
class LowAirspeedError : public NumericError {
public:
    using NumericError::NumericError;
};

class TrimFailure : public NumericError {
public:
    using NumericError::NumericError;
};

class IntegrationFailure : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace hyperfc
