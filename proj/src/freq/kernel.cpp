#include "smib/freq/kernel.hpp"

#include "smib/errors.hpp"

#ifdef SMIB_HAVE_AVX2_KERNEL
#include "kernel_avx2.hpp"
#endif

#include <cmath>
#include <cstdlib>
#include <limits>
#include <vector>

namespace smib::freq {

std::string to_string(Kernel k) { return k == Kernel::avx2 ? "avx2" : "scalar"; }

bool avx2_available() {
#if defined(SMIB_HAVE_AVX2_KERNEL) && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

Kernel select_kernel() {
  if (const char* env = std::getenv("SMIB_FREQ_KERNEL")) {
    if (std::string(env) == "scalar") return Kernel::scalar;
  }
  return avx2_available() ? Kernel::avx2 : Kernel::scalar;
}

void shifted_solve(Kernel k, const Mat& m, const Mat& r, const double* omegas, std::size_t count,
                   CMat* out, bool* ok) {
  if (!is_square(m) || r.rows() != m.rows()) throw InvalidInput("shifted_solve: dimensions do not conform");
#ifdef SMIB_HAVE_AVX2_KERNEL
  if (k == Kernel::avx2 && avx2_available()) {
    shifted_solve_avx2(m, r, omegas, count, out, ok);
    return;
  }
#endif
  (void)k;
  shifted_solve_scalar(m, r, omegas, count, out, ok);
}

#ifdef SMIB_HAVE_AVX2_KERNEL
void shifted_solve_avx2(const Mat& m, const Mat& r, const double* omegas, std::size_t count,
                        CMat* out, bool* ok) {
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMat mr = m, rr = r;
  const int n = int(m.rows()), p = int(r.cols());
  std::vector<Complex> buf(count * std::size_t(n * p));
  detail::shifted_solve_avx2_raw(mr.data(), rr.data(), n, p, omegas, count, buf.data(), ok);
  for (std::size_t f = 0; f < count; ++f) {
    out[f].resize(n, p);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < p; ++c) out[f](i, c) = buf[f * std::size_t(n * p) + std::size_t(i * p + c)];
  }
}
#endif

void shifted_solve_scalar(const Mat& m, const Mat& r, const double* omegas, std::size_t count,
                          CMat* out, bool* ok) {
  const Eigen::Index n = m.rows(), p = r.cols();
  std::vector<Complex> a(n * n), b(n * p);
  for (std::size_t f = 0; f < count; ++f) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) a[i * n + j] = Complex(-m(i, j), i == j ? omegas[f] : 0.0);
      for (Eigen::Index c = 0; c < p; ++c) b[i * p + c] = Complex(r(i, c), 0.0);
    }
    double pmax = 0.0, pmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < n; ++k) {
      Eigen::Index piv = k;
      double best = std::norm(a[k * n + k]);
      for (Eigen::Index i = k + 1; i < n; ++i) {
        const double mag = std::norm(a[i * n + k]);
        if (mag > best) {
          best = mag;
          piv = i;
        }
      }
      if (piv != k) {
        for (Eigen::Index j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
        for (Eigen::Index c = 0; c < p; ++c) std::swap(b[k * p + c], b[piv * p + c]);
      }
      pmax = std::max(pmax, best);
      pmin = std::min(pmin, best);
      const Complex inv = std::conj(a[k * n + k]) / best;
      for (Eigen::Index i = k + 1; i < n; ++i) {
        const Complex factor = a[i * n + k] * inv;
        for (Eigen::Index j = k + 1; j < n; ++j) a[i * n + j] -= factor * a[k * n + j];
        for (Eigen::Index c = 0; c < p; ++c) b[i * p + c] -= factor * b[k * p + c];
      }
    }
    CMat& x = out[f];
    x.resize(n, p);
    for (Eigen::Index k = n - 1; k >= 0; --k) {
      const Complex inv = std::conj(a[k * n + k]) / std::norm(a[k * n + k]);
      for (Eigen::Index c = 0; c < p; ++c) {
        Complex acc = b[k * p + c];
        for (Eigen::Index j = k + 1; j < n; ++j) acc -= a[k * n + j] * x(j, c);
        x(k, c) = acc * inv;
      }
    }
    // Squared magnitudes, so the 1e-14 pivot ratio becomes 1e-28.
    ok[f] = n == 0 || (pmin > 1e-28 * pmax && x.allFinite());
    if (!ok[f]) x.setConstant(Complex(std::nan(""), std::nan("")));
  }
}

}  // namespace smib::freq
