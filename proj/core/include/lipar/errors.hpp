#pragma once

#include <stdexcept>
#include <string>

namespace lipar {

// Base for every error the toolkit raises. Callers that only want to
// distinguish "bad input" from "the math disagreed" catch the two subclasses.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates a documented precondition (shape, range, ordering, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Axis extents do not line up. The message names the offending axis.
class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Malformed or truncated LTNS stream.
class FormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Noise-aware duplication found no clean token for a spatial location.
class CacheMissError : public Error {
 public:
  using Error::Error;
};

// A computed quantity failed a numerical check (oracle mismatch, timer too
// coarse for the workload, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace lipar
