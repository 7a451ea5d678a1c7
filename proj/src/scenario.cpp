#include "anchorloc/scenario.hpp"

#include <algorithm>
#include <cmath>

namespace anchorloc {

namespace {

double lerp(double a, double b, double u) { return a + (b - a) * u; }

Point3 lerp(const Point3& a, const Point3& b, double u) {
    return {lerp(a.x, b.x, u), lerp(a.y, b.y, u), lerp(a.z, b.z, u)};
}

double lerp_angle(double a, double b, double u) { return wrap_pi(a + wrap_pi(b - a) * u); }

EulerAngles lerp_attitude(const EulerAngles& a, const EulerAngles& b, double u) {
    return {lerp_angle(a.roll, b.roll, u), lerp_angle(a.pitch, b.pitch, u),
            lerp_angle(a.yaw, b.yaw, u)};
}

} // namespace

Point3 Trajectory::position_at(double t, double duration) const {
    double tc = std::clamp(t, 0.0, duration);
    switch (type) {
    case Type::Hover:
        return position;
    case Type::Line: {
        double u = duration > 0.0 ? tc / duration : 0.0;
        return lerp(position, line_end, u);
    }
    case Type::Circle: {
        double phase = 2.0 * kPi * tc / period;
        double du = radius * std::cos(phase) - radius; // start on the circle at t = 0
        double dv = radius * std::sin(phase);
        if (plane == Plane::XY) return {position.x + du, position.y + dv, position.z};
        return {position.x + du, position.y, position.z + dv};
    }
    case Type::Waypoints: {
        if (waypoints.empty()) return position;
        if (tc <= waypoints.front().t) return waypoints.front().position;
        if (tc >= waypoints.back().t) return waypoints.back().position;
        auto hi = std::upper_bound(waypoints.begin(), waypoints.end(), tc,
                                   [](double v, const TrajectoryPoint& p) { return v < p.t; });
        auto lo = hi - 1;
        double u = (tc - lo->t) / (hi->t - lo->t);
        return lerp(lo->position, hi->position, u);
    }
    }
    return position;
}

EulerAngles Trajectory::attitude_at(double t, double duration) const {
    double tc = std::clamp(t, 0.0, duration);
    switch (type) {
    case Type::Hover:
    case Type::Circle:
        return attitude;
    case Type::Line: {
        double u = duration > 0.0 ? tc / duration : 0.0;
        return lerp_attitude(attitude, attitude_end, u);
    }
    case Type::Waypoints: {
        if (waypoints.empty()) return attitude;
        if (tc <= waypoints.front().t) return waypoints.front().attitude;
        if (tc >= waypoints.back().t) return waypoints.back().attitude;
        auto hi = std::upper_bound(waypoints.begin(), waypoints.end(), tc,
                                   [](double v, const TrajectoryPoint& p) { return v < p.t; });
        auto lo = hi - 1;
        double u = (tc - lo->t) / (hi->t - lo->t);
        return lerp_attitude(lo->attitude, hi->attitude, u);
    }
    }
    return attitude;
}

std::optional<TruthSample> GroundTruthTrack::interpolate(double t) const {
    if (samples.empty() || t < samples.front().t || t > samples.back().t)
        return std::nullopt;
    auto hi = std::upper_bound(samples.begin(), samples.end(), t,
                               [](double v, const TruthSample& s) { return v < s.t; });
    if (hi == samples.begin()) return samples.front();
    if (hi == samples.end()) return samples.back();
    auto lo = hi - 1;
    double dt = hi->t - lo->t;
    double u = dt > 0.0 ? (t - lo->t) / dt : 0.0;
    TruthSample out;
    out.t = t;
    out.position = lerp(lo->position, hi->position, u);
    out.attitude = lerp_attitude(lo->attitude, hi->attitude, u);
    return out;
}

Pose6DoF Scenario::pose_at(double t) const {
    Pose6DoF pose;
    pose.timestamp = t;
    pose.position = trajectory.position_at(t, duration);
    // R_df^a = R_dw^a * R_df^dw; the mount rotation defaults to identity.
    pose.attitude = sim.anchor_mount * euler_to_rotation(trajectory.attitude_at(t, duration));
    return pose;
}

double Scenario::max_range() const {
    double worst = 0.0;
    const int samples = 256;
    for (int i = 0; i <= samples; ++i) {
        double t = duration * static_cast<double>(i) / samples;
        worst = std::max(worst, (trajectory.position_at(t, duration) - anchor.position).norm());
    }
    return worst;
}

void Scenario::validate() const {
    std::vector<std::string> issues;
    if (!(duration > 0.0)) issues.push_back("duration: must be > 0");
    if (!(chirp_rate > 0.0)) issues.push_back("chirp_rate: must be > 0");
    if (!(imu_rate > 0.0)) issues.push_back("imu_rate: must be > 0");
    if (!(truth_rate > 0.0)) issues.push_back("truth_rate: must be > 0");
    if (chirp_jitter < 0.0) issues.push_back("chirp_jitter: must be >= 0");
    if (chirp_rate > 0.0 && chirp_jitter > 0.02 / chirp_rate)
        issues.push_back("chirp_jitter: must be <= 2% of the chirp period to keep the two radars' timestamps interleaved");
    if (!(noise.noise_power >= 0.0)) issues.push_back("noise.power: must be >= 0");

    try {
        radar_h.validate();
    } catch (const std::invalid_argument& e) {
        issues.push_back(std::string("radar_h: ") + e.what());
    }
    try {
        radar_v.validate();
    } catch (const std::invalid_argument& e) {
        issues.push_back(std::string("radar_v: ") + e.what());
    }
    if (radar_h.polarization != Polarization::Horizontal)
        issues.push_back("radar_h.polarization: must be horizontal");
    if (radar_v.polarization != Polarization::Vertical)
        issues.push_back("radar_v.polarization: must be vertical");
    try {
        anchor.validate();
    } catch (const std::invalid_argument& e) {
        issues.push_back(std::string("anchor: ") + e.what());
    }

    if (trajectory.type == Trajectory::Type::Waypoints) {
        if (trajectory.waypoints.empty()) issues.push_back("trajectory.points: must not be empty");
        for (std::size_t i = 1; i < trajectory.waypoints.size(); ++i)
            if (!(trajectory.waypoints[i].t > trajectory.waypoints[i - 1].t)) {
                issues.push_back("trajectory.points: timestamps must be strictly increasing");
                break;
            }
    }
    if (trajectory.type == Trajectory::Type::Circle && !(trajectory.period > 0.0))
        issues.push_back("trajectory.period: must be > 0");

    if (duration > 0.0) {
        // The anchor must stay inside the forward field of view.
        const int samples = 256;
        for (int i = 0; i <= samples; ++i) {
            double t = duration * static_cast<double>(i) / samples;
            try {
                anchor_in_flight_frame(pose_at(t), anchor);
            } catch (const std::domain_error&) {
                issues.push_back("trajectory: anchor leaves the field-of-view cone at t=" +
                                 std::to_string(t));
                break;
            }
        }

        double worst_beat = std::max(radar_h.beat_frequency(max_range()),
                                     radar_v.beat_frequency(max_range()));
        if (anchor.f1_mod < 10.0 * worst_beat || anchor.f2_mod < 10.0 * worst_beat)
            issues.push_back(
                "anchor.f1_mod/f2_mod: must be >= 10x the maximum geometric beat frequency (" +
                std::to_string(worst_beat) + " Hz) of the scenario");
    }

    if (!issues.empty()) throw ValidationError(std::move(issues));
}

} // namespace anchorloc
