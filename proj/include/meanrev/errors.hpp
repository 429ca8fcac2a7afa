#pragma once

#include <stdexcept>
#include <string>

namespace meanrev {

/// Input data or an intermediate quantity is numerically degenerate
/// (zero variance, singular covariance, flat noise).
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A semidefinite program has an empty feasible set.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed CSV or config input.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace meanrev
