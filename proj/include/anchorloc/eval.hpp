#pragma once

#include "anchorloc/fusion.hpp"

namespace anchorloc {

struct Percentiles {
    double p10 = 0.0;
    double p50 = 0.0;
    double p90 = 0.0;
};

/// One error-vs-time bin; count == 0 marks a gap, the statistics are then
/// meaningless and not serialized.
struct TimeBin {
    double t_start = 0.0;
    std::size_t count = 0;
    double median = 0.0;
    double p10 = 0.0;
    double p90 = 0.0;
};

struct ErrorReport {
    std::size_t pose_count = 0;
    std::size_t evaluated = 0;
    std::size_t excluded_outside_truth = 0;

    Percentiles x_m, y_m, z_m;
    Percentiles roll_deg, pitch_deg, yaw_deg;
    Percentiles l2_m;

    double bin_width = 0.0;
    std::vector<TimeBin> time_bins;
    std::vector<std::pair<double, double>> cdf_3d; // (error m, cumulative fraction)

    DropStats drops;
};

/// Nearest-rank percentile: element ceil(pct/100 * n) of the sorted values.
/// pct in (0, 100]. Throws std::invalid_argument on empty input.
double nearest_rank_percentile(std::vector<double> values, double pct);

/// Compare poses against interpolated ground truth. Euler errors are
/// wrapped to [0, 180] degrees; poses outside the truth span are excluded
/// and counted.
ErrorReport evaluate(const std::vector<Pose6DoF>& poses, const GroundTruthTrack& truth,
                     double bin_width = 10.0, const DropStats* drops = nullptr);

/// Median / 10th / 90th of the 3D error per elapsed-time bin, bins anchored
/// at t = 0. Empty bins are emitted as gaps.
std::vector<TimeBin> error_vs_time(const std::vector<Pose6DoF>& poses,
                                   const GroundTruthTrack& truth, double bin_width);

} // namespace anchorloc
