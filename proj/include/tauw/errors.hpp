#pragma once

#include <stdexcept>
#include <string>

namespace tauw {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition or argument violation (bad counts, empty inputs, out-of-range values).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Feature or dataset schema does not match what a model or operation expects.
class SchemaError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Calibration cannot satisfy the per-leaf sample requirement.
class CalibrationError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// File cannot be read, written, or decoded. Distinct from dataset validation,
/// which reports rule violations instead of throwing.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value or combination of options.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace tauw
