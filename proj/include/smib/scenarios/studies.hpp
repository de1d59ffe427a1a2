#pragma once

#include "smib/freq/kernel.hpp"
#include "smib/freq/margins.hpp"
#include "smib/freq/response.hpp"
#include "smib/model/params.hpp"

#include <optional>
#include <string>
#include <vector>

namespace smib::scenarios {

/// Grid and q-ladder of the loop-shape study. The controller is the published
/// state gain with V10 = I, V = I, V2 = I filters on the reduced model at
/// operating point I; the "ideal" row uses H = ideal_q B.
struct FrequencyStudy {
  double w_min = 1e-3;
  double w_max = 1e3;
  std::size_t points = 2000;
  std::vector<double> q_ladder{0.0, 9.0005, 100.0};
  bool ideal = true;
  double ideal_q = 9.0005;
  std::size_t nyquist_points = 3000;  // per side
  double nyquist_w_min = 1e-4;

  void validate() const;
};

struct StudyLoop {
  std::string label;  // q value or "ideal"
  double q = 0.0;
  bool ideal = false;
};

std::vector<StudyLoop> study_loops(const FrequencyStudy& f);

/// Loop of one study row. With `plant_in_loop` the nine-state linearization
/// at the same loading replaces the reduced model inside N_R.
freq::LoopSpec make_study_loop(const StudyLoop& row, bool plant_in_loop, const model::MachineParams& params = {});

struct MarginRow {
  StudyLoop loop;
  freq::Margins h11, h22;
};

std::vector<MarginRow> margin_table(const FrequencyStudy& f, const model::MachineParams& params = {},
                                    freq::Kernel kernel = freq::select_kernel());

struct NyquistRow {
  StudyLoop loop;
  bool plant_in_loop = false;
  freq::Encirclements h11, h22, det;  // H11, H22 around -1; det(I + L) around 0
  int open_loop_unstable = 0;         // P
  double max_real_eig = 0.0;          // closed-loop matrix spectral abscissa
};

std::vector<NyquistRow> nyquist_table(const FrequencyStudy& f, bool plant_in_loop,
                                      const model::MachineParams& params = {},
                                      freq::Kernel kernel = freq::select_kernel());

}  // namespace smib::scenarios
