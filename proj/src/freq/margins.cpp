#include "smib/freq/margins.hpp"

#include "smib/errors.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace smib::freq {

namespace {

constexpr double kPi = std::numbers::pi;

bool finite(const Complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

double wrap_deg(double d) {
  d = std::fmod(d, 360.0);
  if (d <= -180.0) d += 360.0;
  if (d > 180.0) d -= 360.0;
  return d;
}

// Root of g on [a, b] where g changes sign; bisection in log frequency.
template <class G>
double bisect(G g, double a, double b, double tolerance) {
  double ga = g(a);
  for (int it = 0; it < 200 && b - a > tolerance; ++it) {
    const double mid = (a > 0.0) ? std::sqrt(a * b) : 0.5 * (a + b);
    const double gm = g(mid);
    if ((gm < 0.0) == (ga < 0.0)) {
      a = mid;
      ga = gm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

void keep_smaller(Margin& m, double value, double omega) {
  if (!m.value || std::abs(value) < std::abs(*m.value)) {
    m.value = value;
    m.frequency = omega;
  }
}

double angle_step(Complex from, Complex to) { return std::arg(to / from); }

}  // namespace

std::string Margin::str(int precision) const {
  if (!value) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, *value);
  return buf;
}

Margins compute_margins(const std::vector<double>& omegas, const std::vector<Complex>& values,
                        const ChannelFn& eval, double tolerance) {
  if (omegas.size() != values.size()) throw InvalidInput("compute_margins: grid and values differ in size");
  Margins out;
  auto gain = [&](double w) { return std::abs(eval(w)) - 1.0; };
  auto imag = [&](double w) { return eval(w).imag(); };
  for (std::size_t k = 0; k + 1 < omegas.size(); ++k) {
    const Complex l0 = values[k], l1 = values[k + 1];
    if (!finite(l0) || !finite(l1)) continue;
    const double a = omegas[k], b = omegas[k + 1];

    if ((std::abs(l0) - 1.0) * (std::abs(l1) - 1.0) < 0.0) {
      const double wc = bisect(gain, a, b, tolerance);
      keep_smaller(out.phase_deg, wrap_deg(180.0 + std::arg(eval(wc)) * 180.0 / kPi), wc);
    }
    if (l0.imag() * l1.imag() < 0.0 && (l0.real() < 0.0 || l1.real() < 0.0)) {
      const double wp = bisect(imag, a, b, tolerance);
      const Complex lp = eval(wp);
      if (lp.real() < 0.0) keep_smaller(out.gain_db, -20.0 * std::log10(std::abs(lp)), wp);
    }
  }
  return out;
}

std::vector<double> nyquist_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw InvalidInput("nyquist_grid: need 0 < lo < hi and n >= 2");
  std::vector<double> g;
  g.reserve(2 * n + 1);
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t i = 0; i < n; ++i) g.push_back(-std::pow(10.0, b - (b - a) * double(i) / double(n - 1)));
  g.push_back(0.0);
  for (std::size_t i = 0; i < n; ++i) g.push_back(std::pow(10.0, a + (b - a) * double(i) / double(n - 1)));
  return g;
}

Encirclements count_encirclements(const std::vector<double>& omegas, const std::vector<Complex>& values,
                                  const ChannelFn& eval, Complex center) {
  if (omegas.size() != values.size() || omegas.size() < 2)
    throw InvalidInput("count_encirclements: need matching grid and values");
  Encirclements res;
  res.min_distance = std::numeric_limits<double>::infinity();
  bool bad = false;

  auto shifted = [&](Complex z) {
    if (!finite(z)) bad = true;
    res.min_distance = std::min(res.min_distance, std::abs(z - center));
    return z - center;
  };
  // Adaptive arg increment between two samples.
  std::function<double(double, Complex, double, Complex, int)> turn =
      [&](double wa, Complex za, double wb, Complex zb, int depth) -> double {
    const double d = angle_step(za, zb);
    if (std::abs(d) <= kPi / 4 || depth >= 40 || bad) return d;
    const double wm = 0.5 * (wa + wb);
    const Complex zm = shifted(eval(wm));
    return turn(wa, za, wm, zm, depth + 1) + turn(wm, zm, wb, zb, depth + 1);
  };

  double total = 0.0;
  Complex prev = shifted(values[0]);
  for (std::size_t k = 1; k < values.size(); ++k) {
    const Complex cur = shifted(values[k]);
    if (bad) break;
    total += turn(omegas[k - 1], prev, omegas[k], cur, 0);
    prev = cur;
  }
  if (!bad) total += angle_step(prev, shifted(values[0]));  // closing chord

  const double turns = total / (2.0 * kPi);
  res.indeterminate = bad || res.min_distance < 1e-9 || std::abs(turns - std::round(turns)) > 0.05;
  res.clockwise = -int(std::lround(turns));
  return res;
}

}  // namespace smib::freq
