#pragma once

#include "smib/freq/kernel.hpp"
#include "smib/linalg.hpp"
#include "smib/model/equilibrium.hpp"

#include <optional>
#include <vector>

namespace smib::freq {

/// n log-spaced points over [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t n);

/// Observer-based loop K_C(s) N_R(s). The controller always uses the design
/// model; N_R uses `plant` when given (e.g. the nine-state linearization),
/// otherwise the design model.
struct LoopSpec {
  model::LinearModel design;
  Mat K, H;
  std::optional<model::LinearModel> plant;

  const model::LinearModel& loop_plant() const { return plant ? *plant : design; }
};

/// N_R(jw) = C (jwI - A)^-1 B.
CMat plant_tf_eval(const model::LinearModel& m, double omega);
/// K_C(jw) = K (jwI - A + BK + HC)^-1 H.
CMat controller_tf_eval(const model::LinearModel& m, const Mat& K, const Mat& H, double omega);
/// H_LTF(jw) = K_C(jw) N_R(jw).
CMat loop_tf_eval(const LoopSpec& loop, double omega);
/// Full-state loop K (jwI - A)^-1 B, the LTR target.
CMat state_feedback_loop_eval(const model::LinearModel& m, const Mat& K, double omega);

struct FrequencyResponse {
  std::vector<double> omegas;
  std::vector<CMat> plant, controller, loop;
  std::vector<bool> valid;  // false where a shifted solve was near-singular
  Kernel kernel = Kernel::scalar;

  std::vector<Complex> channel(int i, int j) const;
};

/// Evaluates N_R, K_C and H_LTF on the grid with the given kernel.
FrequencyResponse loop_response(const LoopSpec& loop, const std::vector<double>& omegas,
                                Kernel kernel = select_kernel());

/// Open-loop poles of K_C N_R in the open right half-plane.
int open_loop_unstable_poles(const LoopSpec& loop);

}  // namespace smib::freq
