#include "smib/model/plant.hpp"

#include "smib/errors.hpp"

#include <algorithm>
#include <cmath>

namespace smib::model {

using namespace plant_index;

namespace {

void check_dims(const Vec& x, const Vec& u) {
  if (x.size() != size || u.size() != 2) throw InvalidInput("plant: expected 9 states and 2 inputs");
}

}  // namespace

Vec plant_rhs(const PlantCoefficients& c, const Vec& x, const Vec& u, Network net,
              const ActuatorLimits& limits) {
  check_dims(x, u);
  const double id = x(I_d), i_f = x(I_F), i_dd = x(I_D), iq = x(I_q), i_qq = x(I_Q);
  const double w = x(omega), d = x(delta), tm = x(T_m), gv = x(G_V);
  const double bus = net == Network::faulted ? 0.0 : 1.0;
  const double s = bus * std::sin(d - c.alpha), co = bus * std::cos(d - c.alpha);
  const double vf = std::clamp(u(0), limits.efd_min * c.vf_per_efd, limits.efd_max * c.vf_per_efd);

  Vec dx(size);
  dx(I_d) = c.F11 * id + c.F12 * i_f + c.F13 * i_dd + c.F14 * iq * w + c.F15 * i_qq * w + c.F16 * s + c.G11 * vf;
  dx(I_F) = c.F21 * id + c.F22 * i_f + c.F23 * i_dd + c.F24 * iq * w + c.F25 * i_qq * w + c.F26 * s + c.G21 * vf;
  dx(I_D) = c.F31 * id + c.F32 * i_f + c.F33 * i_dd + c.F34 * iq * w + c.F35 * i_qq * w + c.F36 * s + c.G31 * vf;
  dx(I_q) = c.F41 * id * w + c.F42 * i_f * w + c.F43 * i_dd * w + c.F44 * iq + c.F45 * i_qq + c.F46 * co;
  dx(I_Q) = c.F51 * id * w + c.F52 * i_f * w + c.F53 * i_dd * w + c.F54 * iq + c.F55 * i_qq + c.F56 * co;
  dx(omega) = c.F61 * id * iq + c.F62 * i_f * iq + c.F63 * i_dd * iq + c.F64 * id * i_qq + c.F65 * w + c.F66 * tm;
  dx(delta) = w - 1.0;
  dx(T_m) = c.F81 * tm + c.F82 * gv;
  dx(G_V) = c.F91 * w + c.F92 * gv + c.G92 * u(1);
  if ((gv >= limits.gv_max && dx(G_V) > 0.0) || (gv <= limits.gv_min && dx(G_V) < 0.0)) dx(G_V) = 0.0;
  return dx;
}

Mat plant_jacobian(const PlantCoefficients& c, const Vec& x, Network net) {
  if (x.size() != size) throw InvalidInput("plant_jacobian: expected 9 states");
  const double id = x(I_d), i_f = x(I_F), i_dd = x(I_D), iq = x(I_q), i_qq = x(I_Q);
  const double w = x(omega), d = x(delta);
  const double bus = net == Network::faulted ? 0.0 : 1.0;
  const double s = bus * std::sin(d - c.alpha), co = bus * std::cos(d - c.alpha);

  Mat j = Mat::Zero(size, size);
  const double rows_d[3][6] = {{c.F11, c.F12, c.F13, c.F14, c.F15, c.F16},
                               {c.F21, c.F22, c.F23, c.F24, c.F25, c.F26},
                               {c.F31, c.F32, c.F33, c.F34, c.F35, c.F36}};
  for (int r = 0; r < 3; ++r) {
    const auto& f = rows_d[r];
    j(r, I_d) = f[0];
    j(r, I_F) = f[1];
    j(r, I_D) = f[2];
    j(r, I_q) = f[3] * w;
    j(r, I_Q) = f[4] * w;
    j(r, omega) = f[3] * iq + f[4] * i_qq;
    j(r, delta) = f[5] * co;
  }
  const double rows_q[2][6] = {{c.F41, c.F42, c.F43, c.F44, c.F45, c.F46},
                               {c.F51, c.F52, c.F53, c.F54, c.F55, c.F56}};
  for (int r = 0; r < 2; ++r) {
    const auto& f = rows_q[r];
    j(3 + r, I_d) = f[0] * w;
    j(3 + r, I_F) = f[1] * w;
    j(3 + r, I_D) = f[2] * w;
    j(3 + r, I_q) = f[3];
    j(3 + r, I_Q) = f[4];
    j(3 + r, omega) = f[0] * id + f[1] * i_f + f[2] * i_dd;
    j(3 + r, delta) = -f[5] * s;
  }
  j(omega, I_d) = c.F61 * iq + c.F64 * i_qq;
  j(omega, I_F) = c.F62 * iq;
  j(omega, I_D) = c.F63 * iq;
  j(omega, I_q) = c.F61 * id + c.F62 * i_f + c.F63 * i_dd;
  j(omega, I_Q) = c.F64 * id;
  j(omega, omega) = c.F65;
  j(omega, T_m) = c.F66;
  j(delta, omega) = 1.0;
  j(T_m, T_m) = c.F81;
  j(T_m, G_V) = c.F82;
  j(G_V, omega) = c.F91;
  j(G_V, G_V) = c.F92;
  return j;
}

PlantOutputs plant_outputs(const PlantCoefficients& c, const Vec& x, const Vec& u) {
  check_dims(x, u);
  const double id = x(I_d), i_f = x(I_F), i_dd = x(I_D), iq = x(I_q), i_qq = x(I_Q);
  const double w = x(omega), d = x(delta);
  const double s = std::sin(d - c.alpha), co = std::cos(d - c.alpha);
  PlantOutputs out;
  out.V_d = c.y11 * id + c.y12 * i_f + c.y13 * i_dd + c.y14 * iq * w + c.y15 * i_qq * w + c.y16 * s + c.i11 * u(0);
  out.V_q = c.y21 * id * w + c.y22 * i_f * w + c.y23 * i_dd * w + c.y24 * iq + c.y25 * i_qq + c.y26 * co;
  out.V_t = std::hypot(out.V_d, out.V_q);
  out.omega = w;
  return out;
}

}  // namespace smib::model
