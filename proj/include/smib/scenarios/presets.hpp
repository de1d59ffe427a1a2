#pragma once

#include "smib/control/fl.hpp"
#include "smib/linalg.hpp"
#include "smib/model/equilibrium.hpp"

namespace smib::scenarios {

enum class OpId { I, II };

/// Reduced-model loading. OP I pins (delta, E'_q); OP II pins (E'_q, T_m).
model::Loading cdm_loading(OpId id);
/// Equilibrium guess for the reduced model, needed for OP II.
Vec cdm_guess(OpId id);
/// Plant loading pins (delta, V_t).
model::Loading plant_loading(OpId id);

/// Published desired operating point used as the controller reference on the
/// plant: the tabulated (E'_q, w, delta, T_m, G_V) and V_t, with the steady
/// inputs solved from the field and governor rows of the reduced model. It is
/// not an exact reduced-model equilibrium (the swing row is off by rounding).
model::OperatingPoint published_reference(OpId id, const model::CdmCoefficients& c);

/// Published plant-tuned gains.
Mat published_lqg_gain();  // 2x5
control::FlGains published_nflc_gains();
control::FlGains published_inflc_gains();

/// Published plant-tuned filter weights: q = 5.25, V10 = I, V = I, V2 = 0.65 I.
struct LtrWeights {
  double q = 0.0;
  Mat V10, V, V2;
};
LtrWeights published_ltr_weights();
/// Weights of the frequency study: V10 = I, V = I, V2 = I at the given q.
LtrWeights frequency_study_weights(double q);

inline constexpr double kFrequencyStudyQ = 9.0005;
inline constexpr double kHighQ = 100.0;

}  // namespace smib::scenarios
