#pragma once

#include "anchorloc/eval.hpp"

namespace anchorloc {

enum class SweepAxis { NoisePower, CrossPolIsolation, PThresh };

const char* to_string(SweepAxis axis);
/// Throws std::invalid_argument for an unknown axis name.
SweepAxis sweep_axis_from_string(const std::string& name);

struct SweepResult {
    SweepAxis axis = SweepAxis::NoisePower;
    std::vector<double> values;
    std::vector<ErrorReport> reports; // one per value, pooled over trials
    /// Mean matched-over-mismatched band power in dB (V radar), pooled per
    /// value; +inf when the mismatched band never produced a detection.
    std::vector<double> interference_suppression_db;
};

/// Re-simulate and localize the base scenario once per (value, trial) with
/// seeds derived from the base seed, pooling per-shot errors across trials.
/// Deterministic for a fixed base seed.
SweepResult monte_carlo_sweep(const Scenario& base, SweepAxis axis,
                              const std::vector<double>& values, int trials,
                              const PipelineConfig& cfg, double bin_width = 10.0);

} // namespace anchorloc
