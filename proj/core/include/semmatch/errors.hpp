#pragma once

#include <stdexcept>
#include <string>

namespace semmatch {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or record.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that violates a data invariant (landmark off its
/// segment, empty network, out-of-range coordinates, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Geometric operation undefined for the given input (e.g. bearing between
/// coincident points).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Two states are not connected within the requested travel budget.
class UnreachableError : public Error {
 public:
  using Error::Error;
};

/// No hidden state lies within the candidate radius of an observation.
class NoCandidatesError : public Error {
 public:
  using Error::Error;
};

}  // namespace semmatch
