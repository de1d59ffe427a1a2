#pragma once

#include "smib/linalg.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace smib::freq {

using ChannelFn = std::function<Complex(double omega)>;

/// A stability margin. No crossing inside the analysed band means the margin
/// is unbounded; that case has no value and no frequency.
struct Margin {
  std::optional<double> value;
  std::optional<double> frequency;

  bool unbounded() const { return !value.has_value(); }
  std::string str(int precision = 4) const;  // "inf" when unbounded
};

struct Margins {
  Margin gain_db;    // -20 log10 |L| at the -180 deg crossing
  Margin phase_deg;  // 180 + arg L at the 0 dB crossing, wrapped to (-180, 180]
};

/// Gain and phase margins of a SISO loop sampled on an increasing grid.
/// Crossings are bracketed on the grid and refined by bisection with `eval`
/// until the bracket is below `tolerance` rad/s. With several crossings the
/// one with the smallest |margin| is reported. Invalid (non-finite) samples
/// are skipped.
Margins compute_margins(const std::vector<double>& omegas, const std::vector<Complex>& values,
                        const ChannelFn& eval, double tolerance = 1e-6);

/// -hi ... -lo, 0, lo ... hi with n log-spaced points per side.
std::vector<double> nyquist_grid(double lo, double hi, std::size_t n);

struct Encirclements {
  int clockwise = 0;            // net clockwise turns around the centre
  bool indeterminate = false;   // curve within 1e-9 of the centre, or non-finite samples
  double min_distance = 0.0;
};

/// Net clockwise encirclements of `center` by the closed curve f(jw) for w
/// running over the grid, closed from +W back to -W by a straight chord (valid
/// for strictly proper loops where |L| is small at W). Segments turning by
/// more than pi/4 are subdivided with `eval`.
Encirclements count_encirclements(const std::vector<double>& omegas, const std::vector<Complex>& values,
                                  const ChannelFn& eval, Complex center);

}  // namespace smib::freq
