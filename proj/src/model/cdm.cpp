#include "smib/model/cdm.hpp"

#include "smib/errors.hpp"

#include <algorithm>
#include <cmath>

namespace smib::model {

using namespace cdm_index;

double cdm_electrical_term(const CdmCoefficients& c, double eq, double delta, Network net) {
  // With the bus shorted only the f21 self term survives; every other term
  // carries V_inf.
  if (net == Network::faulted) return c.f21 * eq * eq;
  const double s = std::sin(delta - c.alpha), co = std::cos(delta - c.alpha);
  return c.f21 * eq * eq + c.f22 * eq * co + c.f23 * eq * s + c.f24 * s * co + c.f25 * co * co +
         c.f26 * s * s;
}

Vec cdm_rhs(const CdmCoefficients& c, const Vec& x, const Vec& u, Network net,
            const ActuatorLimits& limits) {
  if (x.size() != size || u.size() != 2) throw InvalidInput("cdm: expected 5 states and 2 inputs");
  const double eq = x(E_q), w = x(omega), d = x(delta), tm = x(T_m), gv = x(G_V);
  const double efd = std::clamp(u(0), limits.efd_min, limits.efd_max);
  const double bus = net == Network::faulted ? 0.0 : 1.0;
  const double s = std::sin(d - c.alpha), co = std::cos(d - c.alpha);

  Vec dx(size);
  dx(E_q) = c.f11 * eq + bus * (c.f12 * co + c.f13 * s) + c.g11 * efd;
  dx(omega) = cdm_electrical_term(c, eq, d, net) + c.f27 * w + c.f28 * tm;
  dx(delta) = w - 1.0;
  dx(T_m) = c.f41 * tm + c.f42 * gv;
  dx(G_V) = c.f51 * w + c.f52 * gv + c.g55 * u(1);
  if ((gv >= limits.gv_max && dx(G_V) > 0.0) || (gv <= limits.gv_min && dx(G_V) < 0.0)) dx(G_V) = 0.0;
  return dx;
}

CdmOutputs cdm_outputs(const CdmCoefficients& c, const Vec& x) {
  if (x.size() != size) throw InvalidInput("cdm_outputs: expected 5 states");
  const double eq = x(E_q), d = x(delta);
  const double s = std::sin(d - c.alpha), co = std::cos(d - c.alpha);
  CdmOutputs out;
  out.V_d = c.Vd1 * eq + c.Vd2 * co + c.Vd3 * s;
  out.V_q = c.Vq1 * eq + c.Vq2 * co + c.Vq3 * s + eq;
  out.V_t = std::hypot(out.V_d, out.V_q);
  out.omega = x(omega);
  return out;
}

}  // namespace smib::model
