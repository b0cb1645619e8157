#pragma once

#include <stdexcept>
#include <string>

namespace stbg {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: dimension mismatch, non-finite data, bad thresholds.
class InvalidInput : public Error {
public:
  using Error::Error;
};

class NumericalFailure : public Error {
public:
  using Error::Error;
};

/// Not enough observations to identify a model.
class InsufficientData : public Error {
public:
  using Error::Error;
};

/// A file could not be opened, read or written. The message names the file.
class IoError : public Error {
public:
  using Error::Error;
};

/// A file was readable but its content or shape is wrong.
class FormatError : public Error {
public:
  using Error::Error;
};

}  // namespace stbg
