#pragma once

#include "smib/model/params.hpp"

#include <string>
#include <vector>

namespace smib::io {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;  // measured values against targets
  double seconds = 0.0;
};

/// Evaluates one acceptance criterion (1-8) with the default parameter set.
/// Runtime budgets are part of the verdict.
CriterionResult check_criterion(int id);

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids = {1, 2, 3, 4, 5, 6, 7, 8});

/// "PASS 3 <title> | <detail>" style line.
std::string format_result(const CriterionResult& r);

}  // namespace smib::io
