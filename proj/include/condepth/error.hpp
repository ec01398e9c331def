#pragma once

#include <stdexcept>
#include <string>

namespace condepth {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user input: bad ranges, non-finite values, malformed files.
class InputError : public Error {
public:
    using Error::Error;
};

/// Mismatched vector lengths, grids or response dimensions.
class DimensionError : public InputError {
public:
    using InputError::InputError;
};

/// Operation not available for the given response dimension.
class UnsupportedDimensionError : public InputError {
public:
    using InputError::InputError;
};

/// Numerical failure or degenerate data (zero scale, empty neighbourhood).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A compact kernel gave zero weight to every observation.
class EmptyNeighborhoodError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// The weighted MAD of the projected sample vanished along a scanned direction.
class DegenerateScaleError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace condepth
