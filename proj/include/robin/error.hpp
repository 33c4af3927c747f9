#pragma once

#include <stdexcept>
#include <string>

namespace robin {

/// Violated precondition on user-supplied parameters (bad lengths, p <= 1, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The rasterized domain is empty, disconnected, or cannot resolve a feature.
class DegenerateRaster : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The requested problem has no finite minimum (Robin parameter at or below -1).
class UnboundedProblem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure could not produce an answer at all.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Discrete trace estimate says the grid cannot support this negative beta.
class CoercivityError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace robin
