#pragma once

#include <stdexcept>
#include <string>

namespace cellkit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a physical law (non-positive concentration,
/// overflowing kinetics argument, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class OcpRangeError : public DomainError {
 public:
  using DomainError::DomainError;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class StepSizeUnderflow : public Error {
 public:
  using Error::Error;
};

class ZeroReference : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cellkit
