#include "smib/control/fl.hpp"

#include "smib/errors.hpp"
#include "smib/numerics/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace smib::control {

using namespace model::cdm_index;

FlTerms fl_terms(const CdmCoefficients& c, const Vec& x, bool pinned_torque) {
  const double e = x(E_q), w = x(omega), tm = x(T_m), gv = x(G_V);
  const double s = std::sin(x(delta) - c.alpha), co = std::cos(x(delta) - c.alpha);
  FlTerms t;
  t.sigma1 = c.p31 * e * e + c.p32 * e * co + c.p33 * e * s + c.p34 * co * co + c.p35 * s * s +
             c.p36 * s * co + c.p37 * w + c.p38 * tm + c.p39 * gv + c.q31 * e * w * co +
             c.q32 * e * w * s + c.q33 * w * co * co + c.q34 * w * s * s + c.q35 * w * s * co;
  t.gamma1 = c.r31 * e + c.r32 * co + c.r33 * s;
  t.sigma2 = c.p51 * w + c.p52 * tm + c.p53 * gv;
  t.gamma2 = c.r51;
  if (pinned_torque) {
    const double z5 = c.f41 * tm + c.f42 * gv;
    t.sigma1 -= c.f28 * z5;
    t.sigma2 -= c.f41 * z5;
  }
  return t;
}

Vec transform_state(const CdmCoefficients& c, const Vec& x) {
  if (x.size() != 5) throw InvalidInput("transform_state: expected 5 states");
  Vec z(5);
  z << x(delta), x(omega) - 1.0,
      model::cdm_electrical_term(c, x(E_q), x(delta)) + c.f27 * x(omega) + c.f28 * x(T_m), x(T_m),
      c.f41 * x(T_m) + c.f42 * x(G_V);
  return z;
}

namespace {

using Scalar = std::function<double(const Vec&)>;
using Field = std::function<Vec(const Vec&)>;

const ActuatorLimits kNoLimits{-std::numeric_limits<double>::infinity(),
                               std::numeric_limits<double>::infinity(),
                               -std::numeric_limits<double>::infinity(),
                               std::numeric_limits<double>::infinity()};

// Fourth-order central difference of phi along the vector field v.
double directional(const Scalar& phi, const Field& v, const Vec& x) {
  constexpr double h = 5e-3;
  const Vec d = v(x);
  return (8.0 * (phi(x + h * d) - phi(x - h * d)) - (phi(x + 2 * h * d) - phi(x - 2 * h * d))) / (12.0 * h);
}

Field drift(const CdmCoefficients& c) {
  return [&c](const Vec& x) { return model::cdm_rhs(c, x, Vec::Zero(2), model::Network::normal, kNoLimits); };
}

Field input_field(const CdmCoefficients& c, int j) {
  return [&c, j](const Vec& x) {
    Vec u = Vec::Zero(2);
    u(j) = 1.0;
    return Vec(model::cdm_rhs(c, x, u, model::Network::normal, kNoLimits) -
               model::cdm_rhs(c, x, Vec::Zero(2), model::Network::normal, kNoLimits));
  };
}

Scalar output_map(int output) {
  if (output == 0) return [](const Vec& x) { return x(delta); };
  if (output == 1) return [](const Vec& x) { return x(T_m); };
  throw InvalidInput("lie derivative: output must be 0 (delta) or 1 (T_m)");
}

Scalar lie_chain(const CdmCoefficients& c, int output, int order) {
  Scalar phi = output_map(output);
  const Field f = drift(c);
  for (int k = 0; k < order; ++k) {
    phi = [phi, f](const Vec& x) { return directional(phi, f, x); };
  }
  return phi;
}

}  // namespace

double lie_drift(const CdmCoefficients& c, int output, int order, const Vec& x) {
  return lie_chain(c, output, order)(x);
}

Eigen::RowVector2d lie_input(const CdmCoefficients& c, int output, int order, const Vec& x) {
  const Scalar phi = lie_chain(c, output, order);
  return {directional(phi, input_field(c, 0), x), directional(phi, input_field(c, 1), x)};
}

RelativeDegree relative_degree_check(const CdmCoefficients& c, const Vec& x) {
  RelativeDegree rd;
  auto degree = [&](int output) {
    for (int k = 0; k < 5; ++k) {
      const double lg = lie_input(c, output, k, x).cwiseAbs().maxCoeff();
      if (lg > 1e-8) return k + 1;
      if (lg > 1e-10) return 0;  // neither zero nor clearly nonzero
    }
    return 0;
  };
  rd.r1 = degree(0);
  rd.r2 = degree(1);
  rd.singular = std::abs(fl_terms(c, x).gamma1) < 1e-8;
  return rd;
}

void fl_subsystems(bool with_integral, Mat& a_g, Mat& b_g, Mat& a_t, Mat& b_t) {
  const int ng = with_integral ? 4 : 3, nt = with_integral ? 3 : 2;
  a_g = Mat::Zero(ng, ng);
  a_g(0, 1) = a_g(1, 2) = 1.0;
  b_g = Mat::Zero(ng, 1);
  b_g(2, 0) = 1.0;
  a_t = Mat::Zero(nt, nt);
  a_t(0, 1) = 1.0;
  b_t = Mat::Zero(nt, 1);
  b_t(1, 0) = 1.0;
  if (with_integral) {
    a_g(3, 0) = 1.0;
    a_t(2, 0) = 1.0;
  }
}

FlGains design_fl_gains(const Mat& q_g, double r_g, const Mat& q_t, double r_t, bool with_integral) {
  Mat a_g, b_g, a_t, b_t;
  fl_subsystems(with_integral, a_g, b_g, a_t, b_t);
  if (q_g.rows() != a_g.rows() || q_t.rows() != a_t.rows()) {
    throw InvalidInput("design_fl_gains: weight dimensions do not match the subsystems");
  }
  const Mat kg = numerics::lqr_gain(a_g, b_g, q_g, Mat::Constant(1, 1, r_g));
  const Mat kt = numerics::lqr_gain(a_t, b_t, q_t, Mat::Constant(1, 1, r_t));
  FlGains g;
  g.integral = with_integral;
  g.K_G = kg.block(0, 0, 1, 3);
  g.K_T = kt.block(0, 0, 1, 2);
  if (with_integral) {
    g.K_iG = kg(0, 3);
    g.K_iT = kt(0, 2);
  }
  return g;
}

std::pair<Mat, Mat> fl_closed_subsystems(const FlGains& gains) {
  Mat a_g, b_g, a_t, b_t;
  fl_subsystems(gains.integral, a_g, b_g, a_t, b_t);
  Mat kg(1, a_g.rows()), kt(1, a_t.rows());
  kg.block(0, 0, 1, 3) = gains.K_G;
  kt.block(0, 0, 1, 2) = gains.K_T;
  if (gains.integral) {
    kg(0, 3) = gains.K_iG;
    kt(0, 2) = gains.K_iT;
  }
  return {a_g - b_g * kg, a_t - b_t * kt};
}

FlOutput fl_control(const CdmCoefficients& c, const FlGains& gains, const Vec& z_d, const Vec& x,
                    const Eigen::Vector2d& integrals, const FlOptions& options) {
  if (z_d.size() != 5) throw InvalidInput("fl_control: reference must have 5 entries");
  const Vec e = transform_state(c, x) - z_d;
  FlOutput out;
  out.w1 = -gains.K_G.dot(e.segment<3>(0));
  out.w2 = -gains.K_T.dot(e.segment<2>(3));
  if (gains.integral) {
    out.w1 -= gains.K_iG * integrals(0);
    out.w2 -= gains.K_iT * integrals(1);
  }
  out.terms = fl_terms(c, x, options.pinned_torque);
  out.u_request = Vec(2);
  out.singular = !(std::abs(out.terms.gamma1) >= options.singularity_threshold);
  out.u_request(0) = out.singular ? std::numeric_limits<double>::quiet_NaN()
                                  : (out.w1 - out.terms.sigma1) / out.terms.gamma1;
  out.u_request(1) = (out.w2 - out.terms.sigma2) / out.terms.gamma2;
  out.u = out.u_request;
  if (!out.singular) {
    out.u(0) = std::clamp(out.u_request(0), options.limits.efd_min, options.limits.efd_max);
    out.efd_saturated = out.u(0) != out.u_request(0);
  }
  out.gate_at_limit = x(G_V) >= options.limits.gv_max || x(G_V) <= options.limits.gv_min;
  return out;
}

Eigen::Vector2d fl_integral_rate(const CdmCoefficients& c, const Vec& z_d, const Vec& x,
                                 const FlOutput& out) {
  const Vec e = transform_state(c, x) - z_d;
  return {out.efd_saturated ? 0.0 : e(0), out.gate_at_limit ? 0.0 : e(3)};
}

FlController::FlController(CdmCoefficients c, FlGains gains, Vec z_d, FlOptions options)
    : c_(std::move(c)), gains_(gains), z_d_(std::move(z_d)), options_(options) {}

Vec FlController::step(const Vec& x, double dt) {
  last_ = fl_control(c_, gains_, z_d_, x, integrals_, options_);
  Vec u = last_.u;
  if (last_.singular) {
    if (!last_good_) throw NumericalError("feedback linearization singular before any valid control");
    u = *last_good_;
  } else {
    last_good_ = u;
    if (gains_.integral) integrals_ += dt * fl_integral_rate(c_, z_d_, x, last_);
  }
  return u;
}

Vec fl_reference(const Vec& cdm_state0) {
  Vec z = Vec::Zero(5);
  z(0) = cdm_state0(delta);
  z(3) = cdm_state0(T_m);
  return z;
}

double reconstruct_eq_prime_a(const CdmCoefficients& c, double i_f, double delta_) {
  return (c.e14 * i_f + c.e12 * std::cos(delta_ - c.alpha) + c.e13 * std::sin(delta_ - c.alpha)) / c.e11;
}

double reconstruct_eq_prime_b(const CdmCoefficients& c, double i_f, double i_d) {
  return c.e14 * i_f + c.L2 * i_d;
}

}  // namespace smib::control
