// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include "kernel_avx2.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace smib::freq::detail {

namespace {

struct CVec4 {
  __m256d re, im;
};

inline CVec4 cmul(CVec4 a, CVec4 b) {
  return {_mm256_fmsub_pd(a.re, b.re, _mm256_mul_pd(a.im, b.im)),
          _mm256_fmadd_pd(a.re, b.im, _mm256_mul_pd(a.im, b.re))};
}

// a - b * c
inline CVec4 cfnmadd(CVec4 a, CVec4 b, CVec4 c) {
  return {_mm256_fmadd_pd(b.im, c.im, _mm256_fnmadd_pd(b.re, c.re, a.re)),
          _mm256_fnmadd_pd(b.im, c.re, _mm256_fnmadd_pd(b.re, c.im, a.im))};
}

inline __m256d cnorm(CVec4 a) { return _mm256_fmadd_pd(a.re, a.re, _mm256_mul_pd(a.im, a.im)); }

inline CVec4 cblend(CVec4 a, CVec4 b, __m256d mask) {
  return {_mm256_blendv_pd(a.re, b.re, mask), _mm256_blendv_pd(a.im, b.im, mask)};
}

// conj(a) / |a|^2, where n = |a|^2.
inline CVec4 cinv(CVec4 a, __m256d n) {
  const __m256d neg = _mm256_set1_pd(-0.0);
  return {_mm256_div_pd(a.re, n), _mm256_div_pd(_mm256_xor_pd(a.im, neg), n)};
}

}  // namespace

void shifted_solve_avx2_raw(const double* m, const double* r, int n, int p, const double* omegas,
                            std::size_t count, std::complex<double>* out, bool* ok) {
  std::vector<CVec4> a(n * n), b(n * p), x(n * p);
  const __m256d zero = _mm256_setzero_pd();

  for (std::size_t base = 0; base < count; base += 4) {
    const std::size_t lanes = std::min<std::size_t>(4, count - base);
    alignas(32) double w[4];
    for (std::size_t l = 0; l < 4; ++l) w[l] = omegas[base + std::min(l, lanes - 1)];
    const __m256d wv = _mm256_load_pd(w);

    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) a[i * n + j] = {_mm256_set1_pd(-m[i * n + j]), i == j ? wv : zero};
      for (int c = 0; c < p; ++c) b[i * p + c] = {_mm256_set1_pd(r[i * p + c]), zero};
    }

    __m256d pmax = zero, pmin = _mm256_set1_pd(INFINITY);
    for (int k = 0; k < n; ++k) {
      __m256d best = cnorm(a[k * n + k]);
      __m256d idx = _mm256_set1_pd(double(k));
      for (int i = k + 1; i < n; ++i) {
        const __m256d mag = cnorm(a[i * n + k]);
        const __m256d gt = _mm256_cmp_pd(mag, best, _CMP_GT_OQ);
        best = _mm256_blendv_pd(best, mag, gt);
        idx = _mm256_blendv_pd(idx, _mm256_set1_pd(double(i)), gt);
      }
      // Per-lane row swap k <-> idx.
      for (int i = k + 1; i < n; ++i) {
        const __m256d sel = _mm256_cmp_pd(idx, _mm256_set1_pd(double(i)), _CMP_EQ_OQ);
        if (_mm256_movemask_pd(sel) == 0) continue;
        for (int j = k; j < n; ++j) {
          const CVec4 top = a[k * n + j];
          a[k * n + j] = cblend(top, a[i * n + j], sel);
          a[i * n + j] = cblend(a[i * n + j], top, sel);
        }
        for (int c = 0; c < p; ++c) {
          const CVec4 top = b[k * p + c];
          b[k * p + c] = cblend(top, b[i * p + c], sel);
          b[i * p + c] = cblend(b[i * p + c], top, sel);
        }
      }
      pmax = _mm256_max_pd(pmax, best);
      pmin = _mm256_min_pd(pmin, best);
      const CVec4 inv = cinv(a[k * n + k], best);
      for (int i = k + 1; i < n; ++i) {
        const CVec4 factor = cmul(a[i * n + k], inv);
        for (int j = k + 1; j < n; ++j) a[i * n + j] = cfnmadd(a[i * n + j], factor, a[k * n + j]);
        for (int c = 0; c < p; ++c) b[i * p + c] = cfnmadd(b[i * p + c], factor, b[k * p + c]);
      }
    }

    for (int k = n - 1; k >= 0; --k) {
      const CVec4 piv = a[k * n + k];
      const CVec4 inv = cinv(piv, cnorm(piv));
      for (int c = 0; c < p; ++c) {
        CVec4 acc = b[k * p + c];
        for (int j = k + 1; j < n; ++j) acc = cfnmadd(acc, a[k * n + j], x[j * p + c]);
        x[k * p + c] = cmul(acc, inv);
      }
    }

    alignas(32) double re[4], im[4], lo[4], hi[4];
    _mm256_store_pd(lo, pmin);
    _mm256_store_pd(hi, pmax);
    for (std::size_t l = 0; l < lanes; ++l) {
      std::complex<double>* dst = out + (base + l) * std::size_t(n * p);
      bool good = n == 0 || lo[l] > 1e-28 * hi[l];
      for (int i = 0; i < n; ++i) {
        for (int c = 0; c < p; ++c) {
          _mm256_store_pd(re, x[i * p + c].re);
          _mm256_store_pd(im, x[i * p + c].im);
          dst[i * p + c] = {re[l], im[l]};
          good = good && std::isfinite(re[l]) && std::isfinite(im[l]);
        }
      }
      ok[base + l] = good;
      if (!good) std::fill(dst, dst + n * p, std::complex<double>(NAN, NAN));
    }
  }
}

}  // namespace smib::freq::detail
