#pragma once

#include <stdexcept>
#include <string>

namespace carnot {

/// Bad argument or precondition violation (dimension mismatch, r <= 0, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Structurally malformed input, e.g. a bracket coefficient vector of the
/// wrong length. Distinct from an algebra that is well formed but violates
/// the Lie axioms, which is reported by validate().
class MalformedInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure could not reach its goal: calibration exhausted its
/// grid, rejection sampling ran out of attempts.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace carnot
