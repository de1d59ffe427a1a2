#include "smib/numerics/ode.hpp"

#include "smib/errors.hpp"

#include <cmath>
#include <sstream>

namespace smib::numerics {

const std::vector<double>& Trace::channel(const std::string& name) const {
  auto it = channels.find(name);
  if (it == channels.end()) throw InvalidInput("Trace: no channel named '" + name + "'");
  return it->second;
}

std::vector<double> Trace::state_component(Eigen::Index i) const {
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s(i));
  return out;
}

bool Trace::consistent() const {
  if (states.size() != times.size()) return false;
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) return false;
  }
  for (const auto& [name, values] : channels) {
    if (values.size() != times.size()) return false;
  }
  return true;
}

Vec rk4_step(const std::function<Vec(double, const Vec&)>& f, double t, const Vec& x, double dt) {
  const Vec k1 = f(t, x);
  const Vec k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1);
  const Vec k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2);
  const Vec k4 = f(t + dt, x + dt * k3);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trace integrate(const OdeProblem& problem) {
  if (!problem.rhs) throw InvalidInput("integrate: missing rhs");
  if (!(problem.t1 > problem.t0)) throw InvalidInput("integrate: t1 must exceed t0");
  if (!(problem.dt > 0.0)) throw InvalidInput("integrate: dt must be positive");
  double previous = problem.t0;
  for (const auto& ev : problem.events) {
    if (!(ev.time > previous) || !(ev.time < problem.t1)) {
      throw InvalidInput("integrate: events must be sorted and strictly inside the time span");
    }
    previous = ev.time;
  }

  Trace trace;
  Vec x = problem.x0;
  int mode = 0;
  auto record = [&](double t) {
    trace.times.push_back(t);
    trace.states.push_back(x);
    if (problem.observer) problem.observer(t, x, mode);
  };
  record(problem.t0);

  // Segment boundaries: t0, event times, t1. Each segment uses the largest
  // step <= dt that divides it evenly, so events fall exactly on samples.
  std::vector<double> bounds{problem.t0};
  for (const auto& ev : problem.events) bounds.push_back(ev.time);
  bounds.push_back(problem.t1);

  for (std::size_t seg = 0; seg + 1 < bounds.size(); ++seg) {
    if (seg > 0) mode = problem.events[seg - 1].mode;
    const double start = bounds[seg];
    const double span = bounds[seg + 1] - start;
    const auto steps = static_cast<long>(std::ceil(span / problem.dt - 1e-9));
    const double h = span / static_cast<double>(steps);
    auto f = [&](double t, const Vec& s) { return problem.rhs(t, s, mode); };
    for (long i = 0; i < steps; ++i) {
      const double t = start + static_cast<double>(i) * h;
      const double t_next = (i + 1 == steps) ? bounds[seg + 1] : start + static_cast<double>(i + 1) * h;
      x = rk4_step(f, t, x, h);
      if (problem.post_step) problem.post_step(t_next, x, mode);
      if (!x.allFinite()) {
        if (problem.partial_on_divergence) {
          trace.diverged = true;
          trace.divergence_time = t_next;
          return trace;
        }
        std::ostringstream os;
        os << "integrate: non-finite state at t = " << t_next;
        throw DivergenceError(os.str(), t_next);
      }
      record(t_next);
    }
  }
  return trace;
}

}  // namespace smib::numerics
