#pragma once

#include <stdexcept>
#include <string>

namespace erpm {

// Base of every exception thrown by the library. The CLI maps the concrete
// classes onto its exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raster dimensions do not satisfy an operation's shape requirement.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed or truncated file, or unreadable input.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Numerical estimation failed (degenerate correspondences, rank deficiency).
class EstimationError : public Error {
 public:
  using Error::Error;
};

// Invalid parameter combination or unknown configuration key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace erpm
