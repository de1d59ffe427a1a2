#include "smib/numerics/newton.hpp"

#include "smib/errors.hpp"

#include <cmath>
#include <sstream>

namespace smib::numerics {

Mat fd_jacobian(const VectorFunction& f, const Vec& x, double rel_step) {
  const Vec f0 = f(x);
  Mat jac(f0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = rel_step * std::max(1.0, std::abs(x(j)));
    Vec xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    jac.col(j) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return jac;
}

NewtonResult newton_solve(const VectorFunction& f, const Vec& x0, const NewtonOptions& options) {
  NewtonResult result;
  result.root = x0;
  Vec fx = f(x0);
  if (fx.size() != x0.size()) throw InvalidInput("newton_solve: F must be square");
  result.residual = max_abs(fx);

  for (int it = 0; it < options.max_iterations; ++it) {
    if (result.residual <= options.tolerance) {
      result.iterations = it;
      return result;
    }
    const Mat jac = fd_jacobian(f, result.root, options.fd_step);
    Eigen::FullPivLU<Mat> lu(jac);
    if (!lu.isInvertible() || lu.rcond() < 1e-14) {
      std::ostringstream os;
      os << "newton_solve: singular Jacobian at iteration " << it << ", residual " << result.residual;
      throw NumericalError(os.str(), result.residual);
    }
    const Vec step = lu.solve(-fx);
    double scale = 1.0;
    Vec trial = result.root + step;
    Vec f_trial = f(trial);
    int halvings = 0;
    while (!(max_abs(f_trial) < result.residual) && halvings < options.max_halvings) {
      scale *= 0.5;
      trial = result.root + scale * step;
      f_trial = f(trial);
      ++halvings;
    }
    if (!f_trial.allFinite()) {
      throw NumericalError("newton_solve: non-finite residual", result.residual);
    }
    const double next = max_abs(f_trial);
    if (!(next < result.residual) && next > options.tolerance) {
      std::ostringstream os;
      os << "newton_solve: no descent after " << halvings << " halvings, residual " << result.residual;
      throw NumericalError(os.str(), result.residual);
    }
    result.root = trial;
    fx = f_trial;
    result.residual = next;
    result.iterations = it + 1;
  }
  if (result.residual <= options.tolerance) return result;
  std::ostringstream os;
  os << "newton_solve: iteration cap reached, residual " << result.residual;
  throw NumericalError(os.str(), result.residual);
}

}  // namespace smib::numerics
