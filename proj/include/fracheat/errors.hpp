#pragma once

#include <stdexcept>
#include <string>

namespace fracheat {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the admissible domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Gamma evaluated at zero or a negative integer.
class PoleError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Result not representable as a finite double.
class OverflowError : public Error {
 public:
  using Error::Error;
};

// No evaluation regime reached the requested accuracy.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Nonlinear solve failed; callers retry with a smaller step.
class NewtonDivergence : public Error {
 public:
  using Error::Error;
};

// Queried a lower-solution value at or beyond its blow-up time.
class PastBlowUpError : public DomainError {
 public:
  using DomainError::DomainError;
};

class NoCompatibleProfile : public Error {
 public:
  using Error::Error;
};

// A verification check was requested for a configuration it does not cover.
class NotApplicable : public Error {
 public:
  using Error::Error;
};

class HypothesisNotMet : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value; the message names the offending field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fracheat
