#pragma once

#include <stdexcept>
#include <string>

namespace flsa {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed data: bad dimensions, unparseable files, inconsistent vectors.
class InvalidInput : public Error {
public:
  using Error::Error;
};

// Block partitions that do not tile 1..n or have empty/overlapping pieces.
class InvalidPartition : public InvalidInput {
public:
  using InvalidInput::InvalidInput;
};

// Out-of-domain scalar parameter (negative penalty, sigma <= 0, ...).
class InvalidParameter : public Error {
public:
  using Error::Error;
};

// Experiment configuration that violates a method's applicability
// preconditions (e.g. a required sign pattern on the true jumps).
class InvalidSetup : public Error {
public:
  using Error::Error;
};

// A linear system that the closed forms cannot handle (zero pivot,
// repeated adjacent entries, empty design).
class SingularSystem : public Error {
public:
  using Error::Error;
};

// Rank-deficient design submatrix where invertibility is required.
class RankDeficient : public SingularSystem {
public:
  using SingularSystem::SingularSystem;
};

// Iterative solver exhausted its budget; carries the final optimality
// residual so callers can judge how far off the certificate was.
class ConvergenceFailure : public Error {
public:
  ConvergenceFailure(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

}  // namespace flsa
