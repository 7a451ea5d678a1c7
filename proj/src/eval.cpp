#include "anchorloc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace anchorloc {

namespace {

struct PoseError {
    double t = 0.0;
    double ex = 0.0, ey = 0.0, ez = 0.0; // m, absolute
    double eroll = 0.0, epitch = 0.0, eyaw = 0.0; // deg, wrapped to [0, 180]
    double e3d = 0.0; // m
};

std::vector<PoseError> pose_errors(const std::vector<Pose6DoF>& poses,
                                   const GroundTruthTrack& truth,
                                   std::size_t* excluded) {
    std::vector<PoseError> errors;
    errors.reserve(poses.size());
    std::size_t outside = 0;
    for (const Pose6DoF& pose : poses) {
        auto ref = truth.interpolate(pose.timestamp);
        if (!ref) {
            ++outside;
            continue;
        }
        PoseError e;
        e.t = pose.timestamp;
        e.ex = std::abs(pose.position.x - ref->position.x);
        e.ey = std::abs(pose.position.y - ref->position.y);
        e.ez = std::abs(pose.position.z - ref->position.z);
        e.e3d = (pose.position - ref->position).norm();
        EulerAngles est = rotation_to_euler(pose.attitude);
        e.eroll = std::abs(rad2deg(wrap_pi(est.roll - ref->attitude.roll)));
        e.epitch = std::abs(rad2deg(wrap_pi(est.pitch - ref->attitude.pitch)));
        e.eyaw = std::abs(rad2deg(wrap_pi(est.yaw - ref->attitude.yaw)));
        errors.push_back(e);
    }
    if (excluded) *excluded = outside;
    return errors;
}

Percentiles percentiles_of(std::vector<double> values) {
    Percentiles p;
    if (values.empty()) return p;
    std::sort(values.begin(), values.end());
    auto rank = [&](double pct) {
        auto n = static_cast<double>(values.size());
        auto idx = static_cast<std::size_t>(std::ceil(pct / 100.0 * n));
        idx = std::clamp<std::size_t>(idx, 1, values.size());
        return values[idx - 1];
    };
    p.p10 = rank(10.0);
    p.p50 = rank(50.0);
    p.p90 = rank(90.0);
    return p;
}

std::vector<TimeBin> bin_errors(const std::vector<PoseError>& errors, double bin_width) {
    std::vector<TimeBin> bins;
    if (errors.empty() || bin_width <= 0.0) return bins;
    double t_max = 0.0;
    for (const auto& e : errors) t_max = std::max(t_max, e.t);
    auto n_bins = static_cast<std::size_t>(std::floor(t_max / bin_width)) + 1;
    std::vector<std::vector<double>> buckets(n_bins);
    for (const auto& e : errors) {
        auto b = static_cast<std::size_t>(std::floor(e.t / bin_width));
        if (b >= n_bins) b = n_bins - 1;
        buckets[b].push_back(e.e3d);
    }
    for (std::size_t b = 0; b < n_bins; ++b) {
        TimeBin bin;
        bin.t_start = static_cast<double>(b) * bin_width;
        bin.count = buckets[b].size();
        if (bin.count > 0) {
            Percentiles p = percentiles_of(buckets[b]);
            bin.median = p.p50;
            bin.p10 = p.p10;
            bin.p90 = p.p90;
        }
        bins.push_back(bin);
    }
    return bins;
}

} // namespace

double nearest_rank_percentile(std::vector<double> values, double pct) {
    if (values.empty()) throw std::invalid_argument("nearest_rank_percentile: empty input");
    if (!(pct > 0.0 && pct <= 100.0))
        throw std::invalid_argument("nearest_rank_percentile: pct must be in (0, 100]");
    std::sort(values.begin(), values.end());
    auto n = static_cast<double>(values.size());
    auto idx = static_cast<std::size_t>(std::ceil(pct / 100.0 * n));
    idx = std::clamp<std::size_t>(idx, 1, values.size());
    return values[idx - 1];
}

ErrorReport evaluate(const std::vector<Pose6DoF>& poses, const GroundTruthTrack& truth,
                     double bin_width, const DropStats* drops) {
    ErrorReport report;
    report.pose_count = poses.size();
    report.bin_width = bin_width;
    if (drops) report.drops = *drops;

    std::vector<PoseError> errors = pose_errors(poses, truth, &report.excluded_outside_truth);
    report.evaluated = errors.size();
    if (errors.empty()) return report;

    auto collect = [&](auto member) {
        std::vector<double> v;
        v.reserve(errors.size());
        for (const auto& e : errors) v.push_back(e.*member);
        return v;
    };
    report.x_m = percentiles_of(collect(&PoseError::ex));
    report.y_m = percentiles_of(collect(&PoseError::ey));
    report.z_m = percentiles_of(collect(&PoseError::ez));
    report.roll_deg = percentiles_of(collect(&PoseError::eroll));
    report.pitch_deg = percentiles_of(collect(&PoseError::epitch));
    report.yaw_deg = percentiles_of(collect(&PoseError::eyaw));
    report.l2_m = percentiles_of(collect(&PoseError::e3d));

    report.time_bins = bin_errors(errors, bin_width);

    std::vector<double> sorted_3d = collect(&PoseError::e3d);
    std::sort(sorted_3d.begin(), sorted_3d.end());
    report.cdf_3d.reserve(sorted_3d.size());
    for (std::size_t i = 0; i < sorted_3d.size(); ++i)
        report.cdf_3d.emplace_back(sorted_3d[i], static_cast<double>(i + 1) /
                                                     static_cast<double>(sorted_3d.size()));
    return report;
}

std::vector<TimeBin> error_vs_time(const std::vector<Pose6DoF>& poses,
                                   const GroundTruthTrack& truth, double bin_width) {
    if (!(bin_width > 0.0)) throw std::invalid_argument("error_vs_time: bin_width must be > 0");
    std::vector<PoseError> errors = pose_errors(poses, truth, nullptr);
    return bin_errors(errors, bin_width);
}

} // namespace anchorloc
