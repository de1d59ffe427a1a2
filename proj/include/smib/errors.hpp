#pragma once

#include <stdexcept>
#include <string>

namespace smib {

/// Rejected input: wrong dimensions, violated preconditions, invalid parameters.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to meet its contract (non-convergence, divergence,
/// singular Jacobian). `residual` carries the last measured residual when known.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double residual = -1.0)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Simulation produced a non-finite state.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, double time)
      : NumericalError(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace smib
