#pragma once

#include "smib/linalg.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace smib::numerics {

/// Right-hand side of x' = f(t, x). The `mode` argument is the index of the
/// currently active event segment (0 before the first event).
using OdeRhs = std::function<Vec(double t, const Vec& x, int mode)>;

struct OdeEvent {
  double time = 0.0;
  int mode = 0;  // mode that becomes active at `time`
};

struct OdeProblem {
  OdeRhs rhs;
  Vec x0;
  double t0 = 0.0;
  double t1 = 1.0;
  double dt = 1e-3;
  std::vector<OdeEvent> events;

  // Applied to the state after every accepted step (state limits, clamps).
  std::function<void(double t, Vec& x, int mode)> post_step;
  // Called once per accepted sample (after post_step) to record extra channels.
  std::function<void(double t, const Vec& x, int mode)> observer;

  // When set, a non-finite state ends the run and the partial trace is returned
  // with `diverged` set instead of throwing.
  bool partial_on_divergence = false;
};

/// Time-indexed record of states plus named scalar channels.
struct Trace {
  std::vector<double> times;
  std::vector<Vec> states;
  std::map<std::string, std::vector<double>> channels;
  bool diverged = false;
  double divergence_time = 0.0;

  std::size_t size() const { return times.size(); }
  void append_channel(const std::string& name, double value) { channels[name].push_back(value); }
  const std::vector<double>& channel(const std::string& name) const;
  std::vector<double> state_component(Eigen::Index i) const;
  bool consistent() const;
};

/// Fixed-step classical RK4. The step grid is split at each event time so that
/// events land exactly on a sample. Throws DivergenceError when a non-finite
/// state appears; InvalidInput for malformed problems.
Trace integrate(const OdeProblem& problem);

/// One RK4 step of x' = f(t, x).
Vec rk4_step(const std::function<Vec(double, const Vec&)>& f, double t, const Vec& x, double dt);

}  // namespace smib::numerics
