#include "anchorloc/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace anchorloc {

namespace {

struct RateSeries {
    std::vector<double> t;
    std::vector<double> rate;
};

// Finite-difference rate of an unwrapped angle series, at interval midpoints.
RateSeries rate_of(const std::vector<double>& ts, const std::vector<double>& angles) {
    RateSeries out;
    double unwrapped = angles.empty() ? 0.0 : angles.front();
    std::vector<double> u(angles.size());
    if (!angles.empty()) u[0] = unwrapped;
    for (std::size_t i = 1; i < angles.size(); ++i) {
        unwrapped += wrap_pi(angles[i] - angles[i - 1]);
        u[i] = unwrapped;
    }
    for (std::size_t i = 1; i < ts.size(); ++i) {
        double dt = ts[i] - ts[i - 1];
        if (dt <= 0.0) continue;
        out.t.push_back(0.5 * (ts[i] + ts[i - 1]));
        out.rate.push_back((u[i] - u[i - 1]) / dt);
    }
    return out;
}

double median_dt(const std::vector<double>& ts) {
    std::vector<double> dts;
    for (std::size_t i = 1; i < ts.size(); ++i) dts.push_back(ts[i] - ts[i - 1]);
    if (dts.empty()) return 0.0;
    std::sort(dts.begin(), dts.end());
    return dts[dts.size() / 2];
}

// Linear interpolation of a rate series at time t; nullopt outside the span.
std::optional<double> sample_series(const RateSeries& s, double t) {
    if (s.t.empty() || t < s.t.front() || t > s.t.back()) return std::nullopt;
    auto hi = std::upper_bound(s.t.begin(), s.t.end(), t);
    if (hi == s.t.begin()) return s.rate.front();
    if (hi == s.t.end()) return s.rate.back();
    std::size_t i = static_cast<std::size_t>(hi - s.t.begin());
    double dt = s.t[i] - s.t[i - 1];
    double u = dt > 0.0 ? (t - s.t[i - 1]) / dt : 0.0;
    return s.rate[i - 1] + (s.rate[i] - s.rate[i - 1]) * u;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx;
        double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

} // namespace

ClockOffset calibrate_offset(const std::vector<ImuSample>& imu,
                             const std::vector<RadarDetection>& h_detections, double window,
                             double min_confidence) {
    if (imu.size() < 4 || h_detections.size() < 4)
        throw CalibrationFailed("calibrate_offset: too few samples");

    std::vector<double> imu_t, imu_yaw;
    for (const auto& s : imu) {
        imu_t.push_back(s.timestamp);
        imu_yaw.push_back(s.attitude.yaw);
    }
    std::vector<double> det_t, det_az;
    for (const auto& d : h_detections) {
        det_t.push_back(d.timestamp);
        det_az.push_back(d.angle);
    }

    double overlap = std::min(imu_t.back(), det_t.back()) - std::max(imu_t.front(), det_t.front());
    if (overlap < 2.0 * window)
        throw CalibrationFailed("calibrate_offset: streams overlap less than twice the window");

    RateSeries yaw_rate = rate_of(imu_t, imu_yaw);
    RateSeries az_rate = rate_of(det_t, det_az);
    if (yaw_rate.t.size() < 3 || az_rate.t.size() < 3)
        throw CalibrationFailed("calibrate_offset: too few rate samples");

    // Rotation-maneuver guard: flat yaw carries no timing information.
    double mean_rate = std::accumulate(yaw_rate.rate.begin(), yaw_rate.rate.end(), 0.0) /
                       static_cast<double>(yaw_rate.rate.size());
    double var = 0.0;
    for (double r : yaw_rate.rate) var += (r - mean_rate) * (r - mean_rate);
    var /= static_cast<double>(yaw_rate.rate.size());
    if (std::sqrt(var) < 1e-3)
        throw CalibrationFailed("calibrate_offset: no rotation maneuver detected");

    const double step = std::min(median_dt(imu_t), median_dt(det_t)) / 4.0;
    if (!(step > 0.0)) throw CalibrationFailed("calibrate_offset: degenerate timestamps");

    // Radar-rate series resampled on a uniform grid; each candidate lag
    // shifts the IMU series against it.
    std::vector<double> grid_t, grid_az;
    for (double t = az_rate.t.front(); t <= az_rate.t.back(); t += step) {
        if (auto v = sample_series(az_rate, t)) {
            grid_t.push_back(t);
            grid_az.push_back(*v);
        }
    }

    const auto max_lag = static_cast<long>(std::ceil(window / step));
    double best_corr = -2.0;
    long best_lag = 0;
    for (long lag = -max_lag; lag <= max_lag; ++lag) {
        double shift = static_cast<double>(lag) * step;
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < grid_t.size(); ++i) {
            if (auto v = sample_series(yaw_rate, grid_t[i] + shift)) {
                xs.push_back(grid_az[i]);
                ys.push_back(*v);
            }
        }
        if (xs.size() < 8) continue;
        double c = pearson(xs, ys);
        if (c > best_corr) {
            best_corr = c;
            best_lag = lag;
        }
    }

    if (best_corr < min_confidence)
        throw CalibrationFailed("calibrate_offset: peak correlation " +
                                std::to_string(best_corr) + " below confidence threshold");
    return {static_cast<double>(best_lag) * step, best_corr, step};
}

EulerAngles interpolate_attitude(const std::vector<ImuSample>& imu, double t) {
    if (imu.empty() || t < imu.front().timestamp || t > imu.back().timestamp)
        throw ExtrapolationError("interpolate_attitude: t=" + std::to_string(t) +
                                 " outside IMU stream span");
    auto hi = std::upper_bound(imu.begin(), imu.end(), t,
                               [](double v, const ImuSample& s) { return v < s.timestamp; });
    if (hi == imu.begin()) return imu.front().attitude;
    if (hi == imu.end()) return imu.back().attitude;
    auto lo = hi - 1;
    double dt = hi->timestamp - lo->timestamp;
    double u = dt > 0.0 ? (t - lo->timestamp) / dt : 0.0;
    auto arc = [u](double a, double b) { return wrap_pi(a + wrap_pi(b - a) * u); };
    return {arc(lo->attitude.roll, hi->attitude.roll),
            arc(lo->attitude.pitch, hi->attitude.pitch),
            arc(lo->attitude.yaw, hi->attitude.yaw)};
}

Pose6DoF fuse(const Fix3D& fix, const EulerAngles& attitude, const Rotation& anchor_mount,
              const Point3& anchor_position) {
    Rotation r_df_dw = euler_to_rotation(attitude);
    Point3 p_anch_dw = r_df_dw * fix.point;
    Pose6DoF pose;
    pose.timestamp = fix.timestamp;
    pose.position = anchor_position - (anchor_mount * p_anch_dw);
    pose.attitude = anchor_mount * r_df_dw;
    return pose;
}

std::array<SearchBand, 2> PipelineConfig::make_bands(const AnchorConfig& anchor) const {
    double hw = band.half_width_hz;
    if (hw <= 0.0) hw = 0.45 * std::abs(anchor.f2_mod - anchor.f1_mod);
    std::array<SearchBand, 2> bands = {SearchBand::centered(anchor.f1_mod, hw),
                                       SearchBand::centered(anchor.f2_mod, hw)};
    for (SearchBand& b : bands) {
        b.guard_bins = band.guard_bins;
        b.snr_threshold = band.snr_threshold;
        b.symmetry_tol_bins = band.symmetry_tol_bins;
    }
    return bands;
}

double PipelineConfig::pairing_gap(double chirp_rate) const {
    if (filter.max_pairing_gap > 0.0) return filter.max_pairing_gap;
    return chirp_rate > 0.0 ? 1.5 / chirp_rate : 0.075;
}

namespace {

struct RadarPass {
    std::vector<RadarDetection> detections; // pre-filter
    RadarDropStats stats;
    std::vector<BandDiagnostics> diagnostics;
};

RadarPass process_radar(const std::vector<BasebandFrame>& frames, const RadarConfig& radar,
                        const AnchorConfig& anchor, const std::array<SearchBand, 2>& bands) {
    RadarPass pass;
    pass.stats.frames = frames.size();
    const int matched = radar.polarization == Polarization::Horizontal ? 0 : 1;
    const int mismatched = 1 - matched;

    for (const BasebandFrame& frame : frames) {
        Spectrum spec = compute_spectrum(frame, radar.sample_rate);
        auto searches =
            separate_dual_frequency(spec, bands, {anchor.f1_mod, anchor.f2_mod});

        BandDiagnostics diag;
        diag.timestamp = frame.timestamp;
        if (searches[0][matched].found())
            diag.matched_power = searches[0][matched].pair.peak_power;
        if (searches[0][mismatched].found()) {
            diag.mismatched_found = true;
            diag.mismatched_power = searches[0][mismatched].pair.peak_power;
        }
        pass.diagnostics.push_back(diag);

        std::array<PeakSearch, 2> per_channel = {searches[0][matched], searches[1][matched]};
        auto det = detect(per_channel, spec, radar, frame.timestamp);
        if (det) {
            pass.detections.push_back(*det);
        } else if (per_channel[0].status == PeakSearch::Status::ambiguous ||
                   per_channel[1].status == PeakSearch::Status::ambiguous) {
            ++pass.stats.ambiguous;
        } else {
            ++pass.stats.no_detection;
        }
    }
    return pass;
}

} // namespace

PipelineResult run_pipeline(const MeasurementLog& log, const PipelineConfig& cfg) {
    PipelineResult result;
    const std::array<SearchBand, 2> bands = cfg.make_bands(log.anchor);

    RadarPass h = process_radar(log.frames_h, log.radar_h, log.anchor, bands);
    RadarPass v = process_radar(log.frames_v, log.radar_v, log.anchor, bands);
    result.stats.h = h.stats;
    result.stats.v = v.stats;
    result.diagnostics_h = std::move(h.diagnostics);
    result.diagnostics_v = std::move(v.diagnostics);

    // Clock offset from pre-filter H detections: calibration wants sample
    // density, not precision.
    result.applied_offset = cfg.calibration.fallback_offset;
    if (cfg.calibration.mode != CalibrationMode::Off) {
        try {
            ClockOffset co = calibrate_offset(log.imu, h.detections, cfg.calibration.window,
                                              cfg.calibration.min_confidence);
            result.clock_offset = co;
            result.applied_offset = co.offset;
        } catch (const CalibrationFailed&) {
            if (cfg.calibration.mode == CalibrationMode::Required) throw;
        }
    }

    std::vector<RadarDetection> kept_h =
        filter_outliers(h.detections, cfg.filter, &result.stats.h.filter);
    std::vector<RadarDetection> kept_v =
        filter_outliers(v.detections, cfg.filter, &result.stats.v.filter);

    const double gap = cfg.pairing_gap(log.chirp_rate);
    auto pairs = pair_detections(kept_h, kept_v, gap);
    result.stats.paired = pairs.size();
    result.stats.unpaired_h = kept_h.size() - pairs.size();
    result.stats.unpaired_v = kept_v.size() - pairs.size();

    FilterConfig pair_cfg = cfg.filter;
    pair_cfg.max_pairing_gap = gap;
    std::vector<std::pair<Fix3D, Pose6DoF>> shots;
    for (const auto& [dh, dv] : pairs) {
        Fix3D fix = combine(dh, dv, pair_cfg);
        EulerAngles attitude;
        try {
            attitude = interpolate_attitude(log.imu, fix.timestamp + result.applied_offset);
        } catch (const ExtrapolationError&) {
            ++result.stats.attitude_out_of_span;
            continue;
        }
        shots.emplace_back(fix, fuse(fix, attitude, cfg.anchor_mount, log.anchor.position));
    }
    std::sort(shots.begin(), shots.end(), [](const auto& a, const auto& b) {
        return a.second.timestamp < b.second.timestamp;
    });
    for (auto& [fix, pose] : shots) {
        result.fixes.push_back(fix);
        result.poses.push_back(pose);
    }
    result.stats.poses = result.poses.size();
    return result;
}

ClockOffset calibrate_from_log(const MeasurementLog& log, const PipelineConfig& cfg) {
    const std::array<SearchBand, 2> bands = cfg.make_bands(log.anchor);
    RadarPass h = process_radar(log.frames_h, log.radar_h, log.anchor, bands);
    return calibrate_offset(log.imu, h.detections, cfg.calibration.window,
                            cfg.calibration.min_confidence);
}

} // namespace anchorloc
