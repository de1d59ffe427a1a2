#pragma once

// Private interface to the AVX2 kernel. The AVX2 translation unit must not
// include Eigen: templates instantiated there would carry AVX code and
// different allocation alignment into the rest of the program.

#include <complex>
#include <cstddef>

namespace smib::freq::detail {

/// m is n x n and r is n x p, both row-major. out receives count blocks of
/// n x p row-major results.
void shifted_solve_avx2_raw(const double* m, const double* r, int n, int p, const double* omegas,
                            std::size_t count, std::complex<double>* out, bool* ok);

}  // namespace smib::freq::detail
