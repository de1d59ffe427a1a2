#pragma once

#include "smib/linalg.hpp"

#include <cstddef>
#include <string>

namespace smib::freq {

/// Implementations of the batched shifted solve X(w) = (jwI - M)^-1 R.
enum class Kernel { scalar, avx2 };

std::string to_string(Kernel k);

/// True when the AVX2 kernel was compiled in and the CPU supports AVX2 and FMA.
bool avx2_available();

/// Kernel chosen at runtime: AVX2 when available, unless the SMIB_FREQ_KERNEL
/// environment variable is set to "scalar". Requesting "avx2" on a machine
/// without it falls back to scalar.
Kernel select_kernel();

/// Solves for every frequency in omegas[0..count). out[i] receives the n x p
/// result; ok[i] is false when the shifted matrix is numerically singular
/// (pivot ratio below 1e-14), in which case out[i] is filled with NaN.
void shifted_solve(Kernel k, const Mat& m, const Mat& r, const double* omegas, std::size_t count,
                   CMat* out, bool* ok);

/// Reference implementation: per-frequency LU with partial pivoting.
void shifted_solve_scalar(const Mat& m, const Mat& r, const double* omegas, std::size_t count,
                          CMat* out, bool* ok);

#ifdef SMIB_HAVE_AVX2_KERNEL
/// Four frequencies per vector lane group, pivoting done per lane with blends.
void shifted_solve_avx2(const Mat& m, const Mat& r, const double* omegas, std::size_t count,
                        CMat* out, bool* ok);
#endif

}  // namespace smib::freq
