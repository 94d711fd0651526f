#pragma once

#include <stdexcept>
#include <string>

namespace qolat {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed parameters that violate a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Particle content does not fit the lattice (N > M * n_max, N_sigma > M).
class CapacityError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Operator/state built on a different basis or channel than required.
class BasisMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Numerical failures: non-convergence, NaN, broken reality checks.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public NumericError {
 public:
  ConvergenceError(const std::string& what, int iterations, double residual)
      : NumericError(what + " (iterations=" + std::to_string(iterations) +
                     ", residual=" + std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}

  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

// A photocount record that the prior cannot produce (all weight on z = 0).
class MeasurementInconsistent : public NumericError {
 public:
  MeasurementInconsistent()
      : NumericError("measurement inconsistent with state") {}
};

// Homodyne detection rate below the F sin^2(dphi) threshold.
class RegimeError : public NumericError {
 public:
  explicit RegimeError(const std::string& detail)
      : NumericError("invalid detection-rate regime: " + detail) {}
};

}  // namespace qolat
