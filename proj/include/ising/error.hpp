#pragma once

#include <stdexcept>
#include <string>

namespace ising {

/// Base class for all library errors. `exit_code()` is what the CLI returns.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

/// Invalid configuration, arguments, or malformed input contents.
class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

/// Inputs whose shapes do not agree (treated as invalid input).
class DimensionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Request exceeds an enumeration budget (e.g. 2^p states with p > 20).
class CapacityError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

class IoError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

}  // namespace ising
