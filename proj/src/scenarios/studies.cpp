#include "smib/scenarios/studies.hpp"

#include "smib/control/lqg.hpp"
#include "smib/errors.hpp"
#include "smib/model/coefficients.hpp"
#include "smib/numerics/eigen.hpp"
#include "smib/scenarios/presets.hpp"

#include <cmath>
#include <sstream>

namespace smib::scenarios {

using namespace smib::model;

void FrequencyStudy::validate() const {
  if (!(w_min > 0.0) || !(w_max > w_min) || !std::isfinite(w_max))
    throw InvalidInput("freq: need 0 < w_min < w_max < inf");
  if (points < 16) throw InvalidInput("freq: points must be at least 16");
  if (!(nyquist_w_min > 0.0) || !(nyquist_w_min < w_max)) throw InvalidInput("freq: need 0 < nyquist_w_min < w_max");
  if (nyquist_points < 16) throw InvalidInput("freq: nyquist_points must be at least 16");
  for (double q : q_ladder)
    if (!(q >= 0.0) || !std::isfinite(q)) throw InvalidInput("freq: q_ladder entries must be finite and >= 0");
  if (ideal && !(ideal_q > 0.0 && std::isfinite(ideal_q))) throw InvalidInput("freq: ideal_q must be positive");
  if (q_ladder.empty() && !ideal) throw InvalidInput("freq: nothing to analyse");
}

std::vector<StudyLoop> study_loops(const FrequencyStudy& f) {
  std::vector<StudyLoop> rows;
  for (double q : f.q_ladder) {
    std::ostringstream os;
    os << q;
    rows.push_back({os.str(), q, false});
  }
  if (f.ideal) rows.push_back({"ideal", f.ideal_q, true});
  return rows;
}

freq::LoopSpec make_study_loop(const StudyLoop& row, bool plant_in_loop, const MachineParams& params) {
  const auto cc = derive_cdm_coefficients(params);
  const auto op = find_equilibrium(cc, cdm_loading(OpId::I), cdm_guess(OpId::I));
  const LinearModel m = linearize_cdm(cc, op);
  const auto w = frequency_study_weights(row.q);
  const Mat h = row.ideal ? control::ideal_filter_gain(m, row.q, w.V, w.V2)
                          : control::design_ltr_filter(m, row.q, w.V10, w.V, w.V2).H;
  freq::LoopSpec loop{m, published_lqg_gain(), h, std::nullopt};
  if (plant_in_loop) {
    const auto pc = derive_plant_coefficients(params);
    loop.plant = linearize_plant(pc, plant_equilibrium(pc, cc, plant_loading(OpId::I)));
  }
  return loop;
}

std::vector<MarginRow> margin_table(const FrequencyStudy& f, const MachineParams& params, freq::Kernel kernel) {
  f.validate();
  const auto grid = freq::log_grid(f.w_min, f.w_max, f.points);
  std::vector<MarginRow> rows;
  for (const auto& row : study_loops(f)) {
    const auto loop = make_study_loop(row, false, params);
    const auto r = freq::loop_response(loop, grid, kernel);
    auto channel_fn = [&loop](int i) {
      return [&loop, i](double w) { return freq::loop_tf_eval(loop, w)(i, i); };
    };
    rows.push_back({row, freq::compute_margins(grid, r.channel(0, 0), channel_fn(0)),
                    freq::compute_margins(grid, r.channel(1, 1), channel_fn(1))});
  }
  return rows;
}

std::vector<NyquistRow> nyquist_table(const FrequencyStudy& f, bool plant_in_loop, const MachineParams& params,
                                      freq::Kernel kernel) {
  f.validate();
  const auto grid = freq::nyquist_grid(f.nyquist_w_min, f.w_max, f.nyquist_points);
  std::vector<NyquistRow> rows;
  for (const auto& row : study_loops(f)) {
    const auto loop = make_study_loop(row, plant_in_loop, params);
    const auto r = freq::loop_response(loop, grid, kernel);
    std::vector<Complex> dets;
    dets.reserve(r.loop.size());
    for (const auto& l : r.loop) dets.push_back((CMat::Identity(2, 2) + l).determinant());
    auto ch = [&loop](int i) {
      return [&loop, i](double w) { return freq::loop_tf_eval(loop, w)(i, i); };
    };
    auto det_fn = [&loop](double w) { return (CMat::Identity(2, 2) + freq::loop_tf_eval(loop, w)).determinant(); };

    NyquistRow out;
    out.loop = row;
    out.plant_in_loop = plant_in_loop;
    out.h11 = freq::count_encirclements(grid, r.channel(0, 0), ch(0), {-1.0, 0.0});
    out.h22 = freq::count_encirclements(grid, r.channel(1, 1), ch(1), {-1.0, 0.0});
    out.det = freq::count_encirclements(grid, dets, det_fn, {0.0, 0.0});
    out.open_loop_unstable = freq::open_loop_unstable_poles(loop);
    const auto& p = loop.loop_plant();
    out.max_real_eig =
        numerics::spectral_abscissa(control::closed_loop_matrix(loop.design, loop.K, loop.H, p.A, p.B, p.C));
    rows.push_back(out);
  }
  return rows;
}

}  // namespace smib::scenarios
