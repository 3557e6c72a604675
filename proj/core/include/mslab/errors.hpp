// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace mslab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the inputs of an operation was violated.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A geometric query hit a singular point (for example the circle center).
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

/// A field was sampled on the wrong side of the interface.
class SideMismatchError : public Error {
 public:
  using Error::Error;
};

/// The iterative solver hit its iteration cap.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// Calibration parameters could not satisfy a required inequality.
/// The message names the inequality.
class InfeasibleParametersError : public Error {
 public:
  using Error::Error;
};

}  // namespace mslab
