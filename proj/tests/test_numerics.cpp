#include "smib/errors.hpp"
#include "smib/numerics/eigen.hpp"
#include "smib/numerics/newton.hpp"
#include "smib/numerics/ode.hpp"
#include "smib/numerics/riccati.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace smib;
using namespace smib::numerics;
using Catch::Approx;

namespace {

Mat random_matrix(std::mt19937& rng, int r, int c) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = n(rng);
  return m;
}

}  // namespace

TEST_CASE("CARE scalar and degenerate cases", "[numerics][care]") {
  Mat one = Mat::Ones(1, 1);
  Mat p = solve_care(Mat::Zero(1, 1), one, one, one);
  CHECK(p(0, 0) == Approx(1.0).margin(1e-12));
  CHECK(lqr_gain(Mat::Zero(1, 1), one, one, one)(0, 0) == Approx(1.0).margin(1e-12));

  Mat a(1, 1);
  a << -1.0;
  Mat p0 = solve_care(a, Mat::Zero(1, 1), Mat::Zero(1, 1), one);
  CHECK(std::abs(p0(0, 0)) < 1e-14);
}

TEST_CASE("CARE double integrator", "[numerics][care]") {
  Mat a(2, 2);
  a << 0, 1, 0, 0;
  Mat b(2, 1);
  b << 0, 1;
  const Mat q = Mat::Identity(2, 2), r = Mat::Identity(1, 1);
  const Mat p = solve_care(a, b, q, r);
  CHECK(care_residual(a, b, q, r, p) <= 1e-10);
  const Mat k = lqr_gain(a, b, q, r);
  CHECK(k(0, 0) == Approx(1.0).margin(1e-10));
  CHECK(k(0, 1) == Approx(std::sqrt(3.0)).margin(1e-10));
  CHECK(is_hurwitz(a - b * k));
}

TEST_CASE("CARE on unstable random systems", "[numerics][care]") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat a = random_matrix(rng, 6, 6) + 0.5 * Mat::Identity(6, 6);
    const Mat b = random_matrix(rng, 6, 2);
    const Mat q = Mat::Identity(6, 6);
    const Mat r = Mat::Identity(2, 2);
    const Mat p = solve_care(a, b, q, r);
    CHECK(care_residual(a, b, q, r, p) <= 1e-8);
    CHECK((p - p.transpose()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(is_hurwitz(a - b * lqr_gain(a, b, q, r)));
  }
}

TEST_CASE("CARE rejects bad input", "[numerics][care]") {
  CHECK_THROWS_AS(solve_care(Mat::Zero(2, 2), Mat::Zero(3, 1), Mat::Identity(2, 2), Mat::Identity(1, 1)),
                  InvalidInput);
  Mat a(1, 1);
  a << 1.0;
  // Unstabilizable: B = 0 with an unstable mode.
  CHECK_THROWS_AS(solve_care(a, Mat::Zero(1, 1), Mat::Ones(1, 1), Mat::Ones(1, 1)), NumericalError);
}

TEST_CASE("Kalman gain is the dual LQR gain", "[numerics][kalman]") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat a = random_matrix(rng, 5, 5);
    const Mat c = random_matrix(rng, 2, 5);
    const Mat v1 = Mat::Identity(5, 5);
    Mat v2 = Mat::Identity(2, 2);
    v2(1, 1) = 0.5;
    const auto kal = kalman_gain(a, c, v1, v2);
    const Mat dual = lqr_gain(a.transpose(), c.transpose(), v1, v2).transpose();
    CHECK((kal.gain - dual).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(filter_care_residual(a, c, v1, v2, kal.covariance) <= 1e-8);
    CHECK(is_hurwitz(a - kal.gain * c));
  }
}

TEST_CASE("Kalman gain vanishes without process noise on a stable system", "[numerics][kalman]") {
  Mat a(2, 2);
  a << -1, 0.3, 0, -2;
  const auto kal = kalman_gain(a, Mat::Identity(2, 2), Mat::Zero(2, 2), Mat::Identity(2, 2));
  CHECK(max_abs(kal.gain) < 1e-12);
  CHECK(max_abs(kal.covariance) < 1e-12);
}

TEST_CASE("Lyapunov solve", "[numerics][lyap]") {
  Mat a(2, 2);
  a << -1, 2, 0, -3;
  const Mat q = Mat::Identity(2, 2);
  const Mat x = solve_lyapunov(a, q);
  CHECK(max_abs(a.transpose() * x + x * a + q) < 1e-13);
}

TEST_CASE("eigenvalues are sorted and complete", "[numerics][eig]") {
  Mat d = Mat::Zero(3, 3);
  d.diagonal() << 3, 1, 2;
  auto ev = eigenvalues(d);
  REQUIRE(ev.size() == 3);
  CHECK(ev[0].real() == Approx(1.0));
  CHECK(ev[1].real() == Approx(2.0));
  CHECK(ev[2].real() == Approx(3.0));

  Mat rot(2, 2);
  rot << 0, 1, -1, 0;
  ev = eigenvalues(rot);
  REQUIRE(ev.size() == 2);
  CHECK(std::abs(ev[0] - Complex(0, -1)) < 1e-12);
  CHECK(std::abs(ev[1] - Complex(0, 1)) < 1e-12);

  std::mt19937 rng(3);
  for (int i = 0; i < 10; ++i) {
    const Mat m = random_matrix(rng, 7, 7);
    CHECK(spectrum_distance(eigenvalues(m), eigenvalues(m.transpose())) <= 1e-9);
  }
  CHECK_THROWS_AS(eigenvalues(Mat::Zero(2, 3)), InvalidInput);
}

TEST_CASE("generalized eigenvalues drop infinite ones", "[numerics][eig]") {
  // G(s) = (s + 3) / ((s + 1)(s + 2)); the system pencil has one finite
  // eigenvalue (the zero at -3) and two infinite ones.
  Mat m(3, 3), e = Mat::Zero(3, 3);
  m << -1, 0, 1,
        0, -2, 1,
       -2, 1, 0;
  e(0, 0) = e(1, 1) = 1.0;
  const auto z = generalized_eigenvalues(m, e);
  REQUIRE(z.size() == 1);
  CHECK(z[0].real() == Approx(-3.0).margin(1e-10));
  CHECK(std::abs(z[0].imag()) < 1e-12);
}

TEST_CASE("Newton solver", "[numerics][newton]") {
  Vec c(3);
  c << 1.0, -2.0, 0.5;
  auto lin = [&](const Vec& x) -> Vec { return x - c; };
  const auto r = newton_solve(lin, Vec::Zero(3));
  // One exact step up to finite-difference rounding of the Jacobian.
  CHECK(r.iterations <= 2);
  CHECK((r.root - c).cwiseAbs().maxCoeff() < 1e-12);

  auto trig = [](const Vec& x) -> Vec {
    Vec f(2);
    f << std::sin(x(0)) - 0.5 * x(1), x(0) * x(0) + x(1) * x(1) - 1.0;
    return f;
  };
  Vec x0(2);
  x0 << 1.0, 1.0;
  const auto s = newton_solve(trig, x0);
  CHECK(max_abs(trig(s.root)) <= 1e-10);

  auto singular = [](const Vec& x) -> Vec {
    Vec f(2);
    f << x(0) + x(1) - 1.0, 2.0 * x(0) + 2.0 * x(1) - 2.0 + 1e-3;
    return f;
  };
  CHECK_THROWS_AS(newton_solve(singular, Vec::Zero(2)), NumericalError);
}

TEST_CASE("RK4 integrator", "[numerics][ode]") {
  OdeProblem constant;
  constant.rhs = [](double, const Vec& x, int) -> Vec { return Vec::Zero(x.size()); };
  constant.x0 = Vec::Constant(2, 3.25);
  constant.t1 = 1.0;
  constant.dt = 0.1;
  const auto tr = integrate(constant);
  CHECK(tr.consistent());
  CHECK(tr.states.back()(1) == 3.25);

  OdeProblem decay;
  decay.rhs = [](double, const Vec& x, int) -> Vec { return -x; };
  decay.x0 = Vec::Ones(1);
  decay.t1 = 1.0;
  decay.dt = 1e-3;
  CHECK(std::abs(integrate(decay).states.back()(0) - std::exp(-1.0)) < 1e-8);

  // Global error ratio under step halving approaches 2^4.
  OdeProblem osc;
  osc.rhs = [](double t, const Vec& x, int) -> Vec {
    Vec d(2);
    d << x(1), -x(0) + 0.1 * std::sin(t);
    return d;
  };
  osc.x0 = Vec::Zero(2);
  osc.x0(0) = 1.0;
  osc.t1 = 5.0;
  auto final_at = [&](double dt) {
    auto p = osc;
    p.dt = dt;
    return integrate(p).states.back();
  };
  const Vec ref = final_at(1e-4);
  const double e1 = (final_at(0.1) - ref).norm();
  const double e2 = (final_at(0.05) - ref).norm();
  const double ratio = e1 / e2;
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("RK4 events land on samples and switch modes", "[numerics][ode]") {
  OdeProblem p;
  p.rhs = [](double, const Vec&, int mode) -> Vec { return Vec::Constant(1, mode == 1 ? 1.0 : 0.0); };
  p.x0 = Vec::Zero(1);
  p.t1 = 1.0;
  p.dt = 0.3;
  p.events = {{0.55, 1}, {0.8, 0}};
  const auto tr = integrate(p);
  CHECK(tr.consistent());
  bool hit1 = false, hit2 = false;
  for (double t : tr.times) {
    hit1 = hit1 || t == 0.55;
    hit2 = hit2 || t == 0.8;
  }
  CHECK(hit1);
  CHECK(hit2);
  CHECK(tr.states.back()(0) == Approx(0.25).margin(1e-12));

  auto bad = p;
  bad.events = {{0.8, 1}, {0.55, 0}};
  CHECK_THROWS_AS(integrate(bad), InvalidInput);
}

TEST_CASE("RK4 reports divergence", "[numerics][ode]") {
  OdeProblem p;
  p.rhs = [](double, const Vec& x, int) -> Vec { return x.cwiseProduct(x); };
  p.x0 = Vec::Ones(1);
  p.t1 = 2.0;
  p.dt = 0.01;
  CHECK_THROWS_AS(integrate(p), DivergenceError);
  p.partial_on_divergence = true;
  const auto tr = integrate(p);
  CHECK(tr.diverged);
  CHECK(tr.divergence_time > 0.9);
  CHECK(tr.divergence_time < 1.1);
}
