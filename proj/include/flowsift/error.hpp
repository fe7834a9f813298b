#pragma once

#include <stdexcept>
#include <string>

namespace flowsift {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration: invalid parameters or a missing required column.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input header lacks a column the reader needs.
class MissingColumnError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Feature layout of a model does not match the data it is applied to.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Fitting on empty or degenerate input.
class FitError : public Error {
 public:
  using Error::Error;
};

class StratificationError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Metric undefined for the input (e.g. only one class present).
class MetricError : public Error {
 public:
  using Error::Error;
};

class ModelFormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace flowsift
