#include "anchorloc/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "anchorloc/rng.hpp"
#include "anchorloc/simulate.hpp"

namespace anchorloc {

const char* to_string(SweepAxis axis) {
    switch (axis) {
    case SweepAxis::NoisePower: return "noise_power";
    case SweepAxis::CrossPolIsolation: return "cross_pol_isolation";
    case SweepAxis::PThresh: return "p_thresh";
    }
    return "?";
}

SweepAxis sweep_axis_from_string(const std::string& name) {
    if (name == "noise_power") return SweepAxis::NoisePower;
    if (name == "cross_pol_isolation") return SweepAxis::CrossPolIsolation;
    if (name == "p_thresh") return SweepAxis::PThresh;
    throw std::invalid_argument("unknown sweep axis: " + name +
                                " (expected noise_power, cross_pol_isolation, or p_thresh)");
}

SweepResult monte_carlo_sweep(const Scenario& base, SweepAxis axis,
                              const std::vector<double>& values, int trials,
                              const PipelineConfig& cfg, double bin_width) {
    if (trials < 1) throw std::invalid_argument("monte_carlo_sweep: trials must be >= 1");
    if (values.empty()) throw std::invalid_argument("monte_carlo_sweep: empty value list");

    SweepResult result;
    result.axis = axis;
    result.values = values;

    for (std::size_t vi = 0; vi < values.size(); ++vi) {
        const double value = values[vi];
        std::vector<Pose6DoF> pooled;
        DropStats pooled_stats;
        GroundTruthTrack truth;
        double suppression_sum = 0.0;
        std::size_t suppression_count = 0;

        for (int trial = 0; trial < trials; ++trial) {
            Scenario scn = base;
            scn.seed = CounterRng::derive(base.seed, vi + 1, static_cast<std::uint64_t>(trial) + 1);
            PipelineConfig run_cfg = cfg;
            switch (axis) {
            case SweepAxis::NoisePower: scn.noise.noise_power = value; break;
            case SweepAxis::CrossPolIsolation: scn.anchor.cross_pol_isolation_db = value; break;
            case SweepAxis::PThresh:
                run_cfg.band.snr_threshold = value;
                run_cfg.filter.snr_threshold = value;
                break;
            }

            MeasurementLog log = simulate_scenario(scn);
            PipelineResult res = run_pipeline(log, run_cfg);
            pooled.insert(pooled.end(), res.poses.begin(), res.poses.end());
            truth = std::move(log.truth); // identical trajectory for every trial

            for (const BandDiagnostics& d : res.diagnostics_v) {
                if (!d.mismatched_found || d.matched_power <= 0.0 || d.mismatched_power <= 0.0)
                    continue;
                suppression_sum += 10.0 * std::log10(d.matched_power / d.mismatched_power);
                ++suppression_count;
            }

            pooled_stats.h.frames += res.stats.h.frames;
            pooled_stats.v.frames += res.stats.v.frames;
            pooled_stats.h.no_detection += res.stats.h.no_detection;
            pooled_stats.v.no_detection += res.stats.v.no_detection;
            pooled_stats.h.ambiguous += res.stats.h.ambiguous;
            pooled_stats.v.ambiguous += res.stats.v.ambiguous;
            pooled_stats.h.filter.kept += res.stats.h.filter.kept;
            pooled_stats.v.filter.kept += res.stats.v.filter.kept;
            pooled_stats.h.filter.dropped_snr += res.stats.h.filter.dropped_snr;
            pooled_stats.v.filter.dropped_snr += res.stats.v.filter.dropped_snr;
            pooled_stats.h.filter.dropped_range_mismatch += res.stats.h.filter.dropped_range_mismatch;
            pooled_stats.v.filter.dropped_range_mismatch += res.stats.v.filter.dropped_range_mismatch;
            pooled_stats.paired += res.stats.paired;
            pooled_stats.unpaired_h += res.stats.unpaired_h;
            pooled_stats.unpaired_v += res.stats.unpaired_v;
            pooled_stats.attitude_out_of_span += res.stats.attitude_out_of_span;
            pooled_stats.poses += res.stats.poses;
        }

        std::sort(pooled.begin(), pooled.end(),
                  [](const Pose6DoF& a, const Pose6DoF& b) { return a.timestamp < b.timestamp; });
        result.reports.push_back(evaluate(pooled, truth, bin_width, &pooled_stats));
        result.interference_suppression_db.push_back(
            suppression_count > 0 ? suppression_sum / static_cast<double>(suppression_count)
                                  : std::numeric_limits<double>::infinity());
    }
    return result;
}

} // namespace anchorloc
