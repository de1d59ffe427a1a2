#pragma once

#include "smib/linalg.hpp"

#include <vector>

namespace smib::numerics {

/// Full spectrum of a real square matrix, sorted by real part, then imaginary part.
std::vector<Complex> eigenvalues(const Mat& m);

/// max Re(lambda); -inf for an empty matrix.
double spectral_abscissa(const Mat& m);

inline bool is_hurwitz(const Mat& m, double margin = 0.0) {
  return spectral_abscissa(m) < -margin;
}

/// Largest distance in an optimal one-to-one matching of two spectra of equal size.
/// Greedy nearest matching on sorted lists; adequate for well-separated spectra.
double spectrum_distance(std::vector<Complex> a, std::vector<Complex> b);

/// Finite generalized eigenvalues of the pencil (E s - M); infinite ones are dropped.
std::vector<Complex> generalized_eigenvalues(const Mat& m, const Mat& e);

}  // namespace smib::numerics
