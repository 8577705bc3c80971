#pragma once

#include <stdexcept>
#include <string>

namespace kbraess {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed circuit: dangling terminal, self-loop, nonpositive resistance.
class CircuitError : public Error {
public:
    using Error::Error;
};

/// Circuit is well formed but has no consistent DC steady state.
class InconsistencyError : public Error {
public:
    using Error::Error;
};

/// Inductor contraction shorted a nonzero net source voltage.
class InconsistentShort : public InconsistencyError {
public:
    using InconsistencyError::InconsistencyError;
};

/// A loop made only of voltage sources has a nonzero signed sum.
class InconsistentSourceLoop : public InconsistencyError {
public:
    using InconsistencyError::InconsistencyError;
};

class SingularSystem : public Error {
public:
    using Error::Error;
};

/// Loss ratio requested against a zero-loss baseline.
class UndefinedRatio : public Error {
public:
    using Error::Error;
};

/// Malformed power network (missing lines, bad coefficients).
class NetworkError : public Error {
public:
    using Error::Error;
};

/// Input file could not be parsed against its schema.
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace kbraess
