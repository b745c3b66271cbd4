#pragma once

#include "rbce/robust.hpp"

#include <iosfwd>

namespace rbce {

/// Sensitivity report: per-predictor bounds and decisions, the causal-effect
/// record, the q grid and the per-q posterior summaries (enough to rerun DSS).
void write_sensitivity_json(const SensitivityResult& r, std::ostream& out);
SensitivityResult read_sensitivity_json(std::istream& in);

}  // namespace rbce
