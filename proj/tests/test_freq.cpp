#include "smib/control/lqg.hpp"
#include "smib/errors.hpp"
#include "smib/freq/kernel.hpp"
#include "smib/freq/margins.hpp"
#include "smib/freq/response.hpp"
#include "smib/model/coefficients.hpp"
#include "smib/numerics/eigen.hpp"
#include "smib/scenarios/presets.hpp"

#include <Eigen/Eigenvalues>
#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>

using namespace smib;
using namespace smib::freq;
using namespace smib::model;
using Catch::Approx;

namespace {

const CdmCoefficients& cdm() {
  static const CdmCoefficients c = derive_cdm_coefficients(MachineParams{});
  return c;
}

const LinearModel& model1() {
  static const LinearModel m = [] {
    const auto op = find_equilibrium(cdm(), scenarios::cdm_loading(scenarios::OpId::I));
    return linearize_cdm(cdm(), op);
  }();
  return m;
}

LoopSpec study_loop(double q) {
  const auto w = scenarios::frequency_study_weights(q);
  return {model1(), scenarios::published_lqg_gain(),
          control::design_ltr_filter(model1(), q, w.V10, w.V, w.V2).H, std::nullopt};
}

CMat eigen_oracle(const Mat& m, const Mat& r, double w) {
  const CMat a = Complex(0.0, w) * CMat::Identity(m.rows(), m.rows()) - m.cast<Complex>();
  return a.fullPivLu().solve(r.cast<Complex>());
}

double rel_err(const CMat& a, const CMat& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

LinearModel siso(const Mat& a, const Mat& b, const Mat& c) {
  LinearModel m;
  m.A = a;
  m.B = b;
  m.C = c;
  m.D = Mat::Zero(c.rows(), b.cols());
  return m;
}

// k / (s + 1)^3 in controllable form.
LinearModel cubic_lag(double k) {
  return siso(Mat{{0, 1, 0}, {0, 0, 1}, {-1, -3, -3}}, Mat{{0}, {0}, {1}}, Mat{{k, 0, 0}});
}

ChannelFn siso_eval(const LinearModel& m) {
  return [m](double w) { return plant_tf_eval(m, w)(0, 0); };
}

std::vector<Complex> sample(const ChannelFn& f, const std::vector<double>& g) {
  std::vector<Complex> v;
  for (double w : g) v.push_back(f(w));
  return v;
}

}  // namespace

TEST_CASE("scalar kernel matches a dense complex LU", "[freq][kernel]") {
  std::mt19937 rng(11);
  std::normal_distribution<double> nd;
  for (int n : {1, 2, 5, 9, 14}) {
    Mat m(n, n), r(n, 3);
    for (auto& x : m.reshaped()) x = nd(rng);
    for (auto& x : r.reshaped()) x = nd(rng);
    const std::vector<double> ws = {-50.0, -1.3, 0.0, 0.01, 0.7, 3.0, 1e3};
    std::vector<CMat> out(ws.size());
    std::unique_ptr<bool[]> ok(new bool[ws.size()]);
    shifted_solve_scalar(m, r, ws.data(), ws.size(), out.data(), ok.get());
    for (std::size_t k = 0; k < ws.size(); ++k) {
      REQUIRE(ok[k]);
      CHECK(rel_err(out[k], eigen_oracle(m, r, ws[k])) <= 1e-11);
    }
  }
}

TEST_CASE("AVX2 kernel is equivalent to the scalar reference", "[freq][kernel]") {
  if (!avx2_available()) {
    SUCCEED("AVX2 kernel not available on this machine");
    return;
  }
  std::mt19937 rng(5);
  std::normal_distribution<double> nd;
  for (int n : {1, 3, 5, 9, 10}) {
    Mat m(n, n), r(n, 2);
    for (auto& x : m.reshaped()) x = nd(rng);
    for (auto& x : r.reshaped()) x = nd(rng);
    // 1003 points so the last lane group is partial.
    std::vector<double> ws = log_grid(1e-3, 1e3, 1001);
    ws.insert(ws.begin(), {-2.0, 0.0});
    std::sort(ws.begin(), ws.end());
    std::vector<CMat> a(ws.size()), b(ws.size());
    std::unique_ptr<bool[]> oka(new bool[ws.size()]), okb(new bool[ws.size()]);
    shifted_solve(Kernel::scalar, m, r, ws.data(), ws.size(), a.data(), oka.get());
    shifted_solve(Kernel::avx2, m, r, ws.data(), ws.size(), b.data(), okb.get());
    double worst = 0.0;
    for (std::size_t k = 0; k < ws.size(); ++k) {
      REQUIRE(oka[k] == okb[k]);
      worst = std::max(worst, rel_err(b[k], a[k]));
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("both kernels flag a singular shifted matrix", "[freq][kernel]") {
  const Mat rot{{0, -1}, {1, 0}};  // eigenvalues +-j
  const Mat r = Mat::Identity(2, 2);
  const std::vector<double> ws = {0.5, 1.0, 2.0, -1.0, 3.0};
  for (Kernel k : {Kernel::scalar, Kernel::avx2}) {
    std::vector<CMat> out(ws.size());
    bool ok[5];
    shifted_solve(k, rot, r, ws.data(), ws.size(), out.data(), ok);
    CHECK(ok[0]);
    CHECK_FALSE(ok[1]);
    CHECK(ok[2]);
    CHECK_FALSE(ok[3]);
    CHECK(ok[4]);
    CHECK(std::isnan(out[1](0, 0).real()));
  }
}

TEST_CASE("kernel selection honours the environment override", "[freq][kernel]") {
  ::setenv("SMIB_FREQ_KERNEL", "scalar", 1);
  CHECK(select_kernel() == Kernel::scalar);
  ::unsetenv("SMIB_FREQ_KERNEL");
  CHECK(select_kernel() == (avx2_available() ? Kernel::avx2 : Kernel::scalar));
  CHECK(to_string(Kernel::avx2) == "avx2");
}

TEST_CASE("plant response matches the modal expansion", "[freq]") {
  const auto& m = model1();
  Eigen::EigenSolver<Mat> es(m.A);
  const CMat v = es.eigenvectors(), vinv = v.inverse();
  const CVec lam = es.eigenvalues();
  for (double w : log_grid(1e-2, 1e2, 20)) {
    CVec d(5);
    for (int i = 0; i < 5; ++i) d(i) = 1.0 / (Complex(0, w) - lam(i));
    const CMat oracle = m.C.cast<Complex>() * v * d.asDiagonal() * vinv * m.B.cast<Complex>();
    CHECK(rel_err(plant_tf_eval(m, w), oracle) <= 1e-10);
  }
  CHECK(plant_tf_eval(m, 1e7).norm() <= 1e-6);
}

TEST_CASE("controller response special cases", "[freq]") {
  const auto& m = model1();
  const Mat H = study_loop(1.0).H;
  CHECK(controller_tf_eval(m, Mat::Zero(2, 5), H, 0.3).norm() == 0.0);
  CHECK(controller_tf_eval(m, scenarios::published_lqg_gain(), Mat::Zero(5, 2), 0.3).norm() == 0.0);

  const double a = -0.4, b = 2.0, c = 0.5, k = 1.5, h = 3.0;
  const auto one = siso(Mat{{a}}, Mat{{b}}, Mat{{c}});
  for (double w : {0.0, 0.2, 7.0}) {
    const Complex expected = k * h / (Complex(0, w) - a + b * k + h * c);
    CHECK(std::abs(controller_tf_eval(one, Mat{{k}}, Mat{{h}}, w)(0, 0) - expected) <= 1e-14);
  }
}

TEST_CASE("loop response composition and symmetry", "[freq]") {
  const auto loop = study_loop(scenarios::kFrequencyStudyQ);
  for (double w : {0.01, 0.5, 4.0}) {
    const CMat kc = controller_tf_eval(loop.design, loop.K, loop.H, w);
    const CMat n = plant_tf_eval(loop.design, w);
    const CMat l = loop_tf_eval(loop, w);
    CHECK(std::abs(l(0, 0) - (kc(0, 0) * n(0, 0) + kc(0, 1) * n(1, 0))) <= 1e-12 * std::max(1.0, std::abs(l(0, 0))));
    CHECK(std::abs(l(1, 1) - (kc(1, 0) * n(0, 1) + kc(1, 1) * n(1, 1))) <= 1e-12 * std::max(1.0, std::abs(l(1, 1))));
    CHECK(rel_err(loop_tf_eval(loop, -w), l.conjugate()) <= 1e-13);
  }
  LoopSpec zero = loop;
  zero.K.setZero();
  CHECK(loop_tf_eval(zero, 1.0).norm() == 0.0);
}

TEST_CASE("grid evaluation agrees with pointwise evaluation for each kernel", "[freq]") {
  const auto loop = study_loop(100.0);
  const auto grid = log_grid(1e-3, 1e3, 257);
  for (Kernel k : {Kernel::scalar, Kernel::avx2}) {
    const auto r = loop_response(loop, grid, k);
    REQUIRE(r.loop.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); i += 16) {
      CHECK(r.valid[i]);
      CHECK(rel_err(r.loop[i], loop_tf_eval(loop, grid[i])) <= 1e-11);
    }
  }
  CHECK_THROWS_AS(loop_response(loop, {1.0, 0.5}), InvalidInput);
}

TEST_CASE("ideal filter gain recovers the full-state loop", "[freq]") {
  const auto& m = model1();
  const Mat k = scenarios::published_lqg_gain();
  const auto grid = log_grid(1e-2, 1e2, 10);
  double last = std::numeric_limits<double>::infinity();
  for (double q : {1.0, 10.0, 100.0}) {
    const LoopSpec loop{m, k, control::ideal_filter_gain(m, q, Mat::Identity(2, 2), Mat::Identity(2, 2)), std::nullopt};
    double sup = 0.0;
    for (double w : grid) sup = std::max(sup, (loop_tf_eval(loop, w) - state_feedback_loop_eval(m, k, w)).norm());
    CHECK(sup <= last);
    last = sup;
  }
}

TEST_CASE("margins of textbook loops", "[freq][margins]") {
  const auto grid = log_grid(1e-3, 1e3, 2000);

  const auto integ = siso(Mat{{0.0}}, Mat{{1.0}}, Mat{{1.0}});
  const auto fi = siso_eval(integ);
  const auto mi = compute_margins(grid, sample(fi, grid), fi);
  REQUIRE_FALSE(mi.phase_deg.unbounded());
  CHECK(*mi.phase_deg.value == Approx(90.0).margin(1e-6));
  CHECK(*mi.phase_deg.frequency == Approx(1.0).margin(1e-6));
  CHECK(mi.gain_db.unbounded());
  CHECK(mi.gain_db.str() == "inf");

  const auto lag = cubic_lag(2.0);
  const auto fl = siso_eval(lag);
  const auto ml = compute_margins(grid, sample(fl, grid), fl);
  const double wc = std::sqrt(std::pow(2.0, 2.0 / 3.0) - 1.0);
  CHECK(*ml.gain_db.value == Approx(20.0 * std::log10(4.0)).margin(1e-6));
  CHECK(*ml.gain_db.frequency == Approx(std::sqrt(3.0)).margin(1e-6));
  CHECK(*ml.phase_deg.value == Approx(180.0 - 3.0 * std::atan(wc) * 180.0 / std::numbers::pi).margin(1e-5));
  CHECK(*ml.phase_deg.frequency == Approx(wc).margin(1e-6));

  // Unstable closed loop gives negative margins.
  const auto f12 = siso_eval(cubic_lag(12.0));
  const auto m12 = compute_margins(grid, sample(f12, grid), f12);
  CHECK(*m12.gain_db.value == Approx(20.0 * std::log10(8.0 / 12.0)).margin(1e-6));
  CHECK(*m12.phase_deg.value < 0.0);

  auto zero = [](double) { return Complex(0.0); };
  const auto m0 = compute_margins(grid, sample(zero, grid), zero);
  CHECK(m0.gain_db.unbounded());
  CHECK(m0.phase_deg.unbounded());
}

TEST_CASE("encirclement counts of textbook loops", "[freq][nyquist]") {
  const auto grid = nyquist_grid(1e-3, 1e3, 800);
  auto count = [&](const ChannelFn& f) { return count_encirclements(grid, sample(f, grid), f, {-1.0, 0.0}); };

  auto zero = [](double) { return Complex(0.0); };
  CHECK(count(zero).clockwise == 0);
  CHECK(count(siso_eval(cubic_lag(2.0))).clockwise == 0);
  // k > 8: two closed-loop poles cross into the right half-plane.
  CHECK(count(siso_eval(cubic_lag(12.0))).clockwise == 2);
  // 2 / (s - 1): one open-loop unstable pole, stabilized, so one counter-clockwise turn.
  const auto unstable = count(siso_eval(siso(Mat{{1.0}}, Mat{{1.0}}, Mat{{2.0}})));
  CHECK(unstable.clockwise == -1);
  CHECK_FALSE(unstable.indeterminate);
  // k = 8 passes through -1 at w = sqrt(3).
  auto through = [](double w) { return 8.0 / std::pow(Complex(1.0, w), 3); };
  std::vector<double> g2 = grid;
  g2.push_back(std::sqrt(3.0));
  std::sort(g2.begin(), g2.end());
  CHECK(count_encirclements(g2, sample(through, g2), through, {-1.0, 0.0}).indeterminate);
}

TEST_CASE("Nyquist count agrees with the closed-loop spectrum on the plant", "[freq][nyquist]") {
  const MachineParams p;
  const auto pc = derive_plant_coefficients(p);
  const auto pop = plant_equilibrium(pc, cdm(), scenarios::plant_loading(scenarios::OpId::I));
  const auto plant = linearize_plant(pc, pop);
  const auto grid = nyquist_grid(1e-4, 1e3, 3000);
  for (double q : {0.0, scenarios::kFrequencyStudyQ, scenarios::kHighQ}) {
    LoopSpec loop = study_loop(q);
    loop.plant = plant;
    const auto r = loop_response(loop, grid);
    // Generalized Nyquist: det(I + L) around the origin.
    std::vector<Complex> dets;
    for (const auto& l : r.loop) dets.push_back((CMat::Identity(2, 2) + l).determinant());
    auto det_eval = [&](double w) { return (CMat::Identity(2, 2) + loop_tf_eval(loop, w)).determinant(); };
    const auto enc = count_encirclements(grid, dets, det_eval, {0.0, 0.0});
    REQUIRE_FALSE(enc.indeterminate);
    int rhp = 0;
    for (const auto& z : numerics::eigenvalues(
             control::closed_loop_matrix(loop.design, loop.K, loop.H, plant.A, plant.B, plant.C)))
      rhp += z.real() > 0.0;
    CHECK(enc.clockwise + open_loop_unstable_poles(loop) == rhp);
  }
}
