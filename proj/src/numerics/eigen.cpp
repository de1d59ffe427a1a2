#include "smib/numerics/eigen.hpp"

#include "smib/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace smib::numerics {

namespace {

bool spectral_order(const Complex& a, const Complex& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

}  // namespace

std::vector<Complex> eigenvalues(const Mat& m) {
  if (!is_square(m)) throw InvalidInput("eigenvalues: matrix must be square");
  std::vector<Complex> out;
  if (m.size() == 0) return out;
  Eigen::EigenSolver<Mat> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw NumericalError("eigenvalues: QR iteration failed");
  const CVec ev = solver.eigenvalues();
  out.assign(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end(), spectral_order);
  return out;
}

double spectral_abscissa(const Mat& m) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& l : eigenvalues(m)) best = std::max(best, l.real());
  return best;
}

double spectrum_distance(std::vector<Complex> a, std::vector<Complex> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  std::vector<bool> used(b.size(), false);
  for (const auto& x : a) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(x - b[j]);
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    used[arg] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

std::vector<Complex> generalized_eigenvalues(const Mat& m, const Mat& e) {
  if (!is_square(m) || m.rows() != e.rows() || m.cols() != e.cols()) {
    throw InvalidInput("generalized_eigenvalues: pencil dimensions must agree");
  }
  Eigen::GeneralizedEigenSolver<Mat> solver(m, e, /*computeEigenvectors=*/false);
  std::vector<Complex> out;
  const auto alphas = solver.alphas();
  const auto betas = solver.betas();
  const double scale = std::max(1.0, max_abs(m));
  for (Eigen::Index i = 0; i < alphas.size(); ++i) {
    if (std::abs(betas(i)) <= 1e-10 * std::abs(alphas(i)) || std::abs(betas(i)) < 1e-14) continue;
    const Complex z = alphas(i) / betas(i);
    if (std::abs(z) > 1e8 * scale) continue;
    out.push_back(z);
  }
  std::sort(out.begin(), out.end(), spectral_order);
  return out;
}

}  // namespace smib::numerics
