#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tvarx {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input files, unreadable paths, parse failures.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A precondition or invariant on user-supplied values does not hold.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Sampling constraints violated (e.g. a tone above the Nyquist frequency).
class SamplingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// The request is well-formed but outside what the method supports
/// (TAR model where an exogenous channel is needed, v5cubic extrapolation...).
class DomainRefusal : public Error {
 public:
  using Error::Error;
};

class UnsupportedModel : public DomainRefusal {
 public:
  using DomainRefusal::DomainRefusal;
};

class InterpolationRefused : public DomainRefusal {
 public:
  using DomainRefusal::DomainRefusal;
};

/// Non-finite intermediate in a numerical recursion. `time_index` is the
/// 1-based discrete time at which it was detected.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, std::size_t time_index)
      : Error(what + " (t = " + std::to_string(time_index) + ")"), time_index_(time_index) {}

  std::size_t time_index() const noexcept { return time_index_; }

 private:
  std::size_t time_index_;
};

/// Simulated output exceeded the overflow guard.
class DivergedSimulation : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

}  // namespace tvarx
