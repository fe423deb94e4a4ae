#pragma once

#include <stdexcept>
#include <string>

namespace mudas {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid configuration value or combination (CLI exit code 2).
struct ConfigError : Error {
  using Error::Error;
};

/// Malformed or truncated file content (CLI exit code 3).
struct FormatError : Error {
  using Error::Error;
};

/// Dimension mismatch or empty input where data is required (CLI exit code 3).
struct ShapeError : Error {
  using Error::Error;
};

/// Non-finite value reached a place that requires finite arithmetic (CLI exit code 4).
struct NumericError : Error {
  using Error::Error;
};

/// Operation not available for the requested variant.
struct UnsupportedError : Error {
  using Error::Error;
};

}  // namespace mudas
