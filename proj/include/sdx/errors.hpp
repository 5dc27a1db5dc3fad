#pragma once

#include <stdexcept>
#include <string>

namespace sdx {

/// Malformed arguments: dimension mismatches, non-finite entries, bad indices.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative kernel failed to converge or hit a breakdown.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exhaustive routines refuse inputs above their hard size guard.
class TooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// A linear transform that must be invertible is not.
class SingularTransform : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A candidate point violates a constraint beyond the feasibility tolerance.
class InfeasiblePoint : public std::domain_error {
 public:
  InfeasiblePoint(std::size_t constraint, double value)
      : std::domain_error("point violates constraint " +
                          std::to_string(constraint + 1) +
                          " (value " + std::to_string(value) + ")"),
        constraint_(constraint),
        value_(value) {}

  std::size_t constraint() const noexcept { return constraint_; }
  double value() const noexcept { return value_; }

 private:
  std::size_t constraint_;
  double value_;
};

}  // namespace sdx
