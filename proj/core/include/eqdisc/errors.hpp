#pragma once

#include <stdexcept>
#include <string>

namespace eqdisc {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Bad or missing input: files, config values, preconditions on arguments.
class InputError : public Error {
  public:
    using Error::Error;
};

/// A computation could not produce a finite or well-defined result.
class NumericalError : public Error {
  public:
    using Error::Error;
};

/// The forcing system is singular at this frequency (finite-rod resonance).
class ResonanceError : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

/// The Floquet ratio denominator vanished (displacement node).
class NodeError : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

} // namespace eqdisc
