#pragma once

#include <stdexcept>
#include <string>

namespace dendrite {

/// Bad input: out-of-range arguments, malformed files, inconsistent configuration.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure: singular factorization, non-finite state, Newton divergence.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dendrite
