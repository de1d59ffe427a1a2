#include "smib/freq/response.hpp"

#include "smib/errors.hpp"
#include "smib/numerics/eigen.hpp"

#include <cmath>
#include <limits>
#include <memory>

namespace smib::freq {

namespace {

CMat solve_one(const Mat& m, const Mat& r, double omega) {
  CMat out;
  bool ok = false;
  shifted_solve_scalar(m, r, &omega, 1, &out, &ok);
  if (!ok) throw NumericalError("shifted solve is singular at w = " + std::to_string(omega));
  return out;
}

Mat controller_matrix(const model::LinearModel& m, const Mat& K, const Mat& H) {
  if (K.rows() != m.B.cols() || K.cols() != m.A.rows() || H.rows() != m.A.rows() || H.cols() != m.C.rows())
    throw InvalidInput("controller gains do not conform to the model");
  return m.A - m.B * K - H * m.C;
}

}  // namespace

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw InvalidInput("log_grid: need 0 < lo < hi and n >= 2");
  std::vector<double> g(n);
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t i = 0; i < n; ++i) g[i] = std::pow(10.0, a + (b - a) * double(i) / double(n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

CMat plant_tf_eval(const model::LinearModel& m, double omega) {
  return m.C.cast<Complex>() * solve_one(m.A, m.B, omega) + m.D.cast<Complex>();
}

CMat controller_tf_eval(const model::LinearModel& m, const Mat& K, const Mat& H, double omega) {
  return K.cast<Complex>() * solve_one(controller_matrix(m, K, H), H, omega);
}

CMat loop_tf_eval(const LoopSpec& loop, double omega) {
  return controller_tf_eval(loop.design, loop.K, loop.H, omega) * plant_tf_eval(loop.loop_plant(), omega);
}

CMat state_feedback_loop_eval(const model::LinearModel& m, const Mat& K, double omega) {
  return K.cast<Complex>() * solve_one(m.A, m.B, omega);
}

std::vector<Complex> FrequencyResponse::channel(int i, int j) const {
  std::vector<Complex> out(loop.size());
  for (std::size_t k = 0; k < loop.size(); ++k) out[k] = loop[k](i, j);
  return out;
}

FrequencyResponse loop_response(const LoopSpec& loop, const std::vector<double>& omegas, Kernel kernel) {
  for (std::size_t i = 1; i < omegas.size(); ++i)
    if (!(omegas[i] > omegas[i - 1])) throw InvalidInput("loop_response: grid must be strictly increasing");
  const auto& p = loop.loop_plant();
  const Mat acl = controller_matrix(loop.design, loop.K, loop.H);
  const std::size_t n = omegas.size();

  FrequencyResponse r;
  r.omegas = omegas;
  r.kernel = (kernel == Kernel::avx2 && !avx2_available()) ? Kernel::scalar : kernel;
  std::vector<CMat> xp(n), xc(n);
  std::unique_ptr<bool[]> okp(new bool[n]), okc(new bool[n]);
  shifted_solve(r.kernel, p.A, p.B, omegas.data(), n, xp.data(), okp.get());
  shifted_solve(r.kernel, acl, loop.H, omegas.data(), n, xc.data(), okc.get());

  const CMat C = p.C.cast<Complex>(), D = p.D.cast<Complex>(), K = loop.K.cast<Complex>();
  r.plant.resize(n);
  r.controller.resize(n);
  r.loop.resize(n);
  r.valid.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    r.plant[k] = C * xp[k] + D;
    r.controller[k] = K * xc[k];
    r.loop[k] = r.controller[k] * r.plant[k];
    r.valid[k] = okp[k] && okc[k];
  }
  return r;
}

int open_loop_unstable_poles(const LoopSpec& loop) {
  int count = 0;
  for (const auto& z : numerics::eigenvalues(loop.loop_plant().A)) count += z.real() > 0.0;
  for (const auto& z : numerics::eigenvalues(controller_matrix(loop.design, loop.K, loop.H)))
    count += z.real() > 0.0;
  return count;
}

}  // namespace smib::freq
