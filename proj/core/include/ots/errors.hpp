#pragma once

#include <stdexcept>
#include <string>

namespace ots {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: JSON syntax errors, missing or mistyped fields.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Structurally well-formed input that violates a domain invariant.
/// The message names the offending bus/line where applicable.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The line graph of a network does not connect all buses.
class DisconnectedError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnknownLineError : public Error {
 public:
  using Error::Error;
};

class MissingBoundsError : public Error {
 public:
  using Error::Error;
};

/// A fixed line status contradicts another fixing or a side condition.
class InconsistentFixingError : public Error {
 public:
  using Error::Error;
};

/// Solver-level failure; wraps the backend diagnostic string.
class BackendError : public Error {
 public:
  using Error::Error;
};

class TooLargeError : public Error {
 public:
  using Error::Error;
};

class InfeasibleEverywhereError : public Error {
 public:
  using Error::Error;
};

class HeuristicError : public Error {
 public:
  using Error::Error;
};

class NoIncumbentError : public Error {
 public:
  using Error::Error;
};

class ZeroWidthError : public Error {
 public:
  using Error::Error;
};

}  // namespace ots
