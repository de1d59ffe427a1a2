#pragma once

#include "smib/linalg.hpp"

#include <functional>

namespace smib::numerics {

struct NewtonOptions {
  int max_iterations = 100;
  int max_halvings = 30;
  double tolerance = 1e-10;      // on ||F(x)||_inf
  double fd_step = 1e-7;         // relative finite-difference step
};

struct NewtonResult {
  Vec root;
  double residual = 0.0;
  int iterations = 0;
};

using VectorFunction = std::function<Vec(const Vec&)>;

/// Central finite-difference Jacobian of f at x.
Mat fd_jacobian(const VectorFunction& f, const Vec& x, double rel_step = 1e-7);

/// Damped Newton iteration with a finite-difference Jacobian. Steps are halved
/// (up to max_halvings times) until the residual decreases. Throws
/// NumericalError with the last residual on a singular Jacobian or when the
/// iteration cap is hit.
NewtonResult newton_solve(const VectorFunction& f, const Vec& x0, const NewtonOptions& options = {});

}  // namespace smib::numerics
