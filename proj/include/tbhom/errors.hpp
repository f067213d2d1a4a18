// SPDX-License-Identifier: MIT
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tbhom {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid input shape, grid, or parameter.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class SolvabilityError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

class PositivityError : public Error {
 public:
  using Error::Error;
};

class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, std::size_t step) : Error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

class ReconstructionError : public Error {
 public:
  using Error::Error;
};

class DecompositionError : public Error {
 public:
  using Error::Error;
};

// Internal inconsistency, e.g. a negative eigenvalue inside the cutoff support.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace tbhom
