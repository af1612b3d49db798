#pragma once

#include <stdexcept>
#include <string>

namespace tweetnews {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform for an op.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Malformed or missing input data (files, corpora, token ids).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or argument values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A loss or parameter became non-finite.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace tweetnews
