#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "anchorloc/channel.hpp"

namespace anchorloc {

struct ValidationError : std::runtime_error {
    explicit ValidationError(std::vector<std::string> problems)
        : std::runtime_error(join(problems)), issues(std::move(problems)) {}
    std::vector<std::string> issues;

  private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s = "scenario validation failed:";
        for (const auto& i : v) s += "\n  - " + i;
        return s;
    }
};

struct TrajectoryPoint {
    double t = 0.0;
    Point3 position;
    EulerAngles attitude;
};

/// Drone path in the anchor frame. Positions interpolate linearly between
/// keys; attitude angles interpolate along the shortest arc per angle.
struct Trajectory {
    enum class Type { Hover, Line, Circle, Waypoints };
    Type type = Type::Hover;

    // Hover / Circle
    Point3 position{0.0, -2.0, 0.0};
    EulerAngles attitude;

    // Line
    Point3 line_end{0.0, -2.0, 0.0};
    EulerAngles attitude_end;

    // Circle: parametric loop in the given plane around `position`.
    double radius = 0.5;
    double period = 8.0;
    enum class Plane { XY, XZ } plane = Plane::XY;

    // Waypoints, strictly increasing t.
    std::vector<TrajectoryPoint> waypoints;

    Point3 position_at(double t, double duration) const;
    EulerAngles attitude_at(double t, double duration) const;
};

/// IMU attitude record, stamped in the IMU's own clock.
struct ImuSample {
    double timestamp = 0.0;
    EulerAngles attitude;
};

struct TruthSample {
    double t = 0.0;
    Point3 position;      // drone in anchor frame
    EulerAngles attitude; // flight frame vs drone-world frame
};

struct GroundTruthTrack {
    std::vector<TruthSample> samples;

    /// Linear position / shortest-arc attitude interpolation. nullopt when
    /// t falls outside the sampled span.
    std::optional<TruthSample> interpolate(double t) const;
};

/// Full synthetic experiment description.
struct Scenario {
    double duration = 10.0; // s
    std::uint64_t seed = 1;
    Trajectory trajectory;
    RadarConfig radar_h = RadarConfig::default_h();
    RadarConfig radar_v = RadarConfig::default_v();
    AnchorConfig anchor;
    NoiseModel noise; // seed field is overridden by the scenario seed
    double chirp_rate = 20.0;        // Hz per radar
    double chirp_jitter = 5e-4;      // s, uniform, per chirp
    double imu_rate = 100.0;         // Hz
    double imu_clock_offset = 0.0;   // s, IMU clock minus radar clock
    double truth_rate = 200.0;       // Hz
    SimOptions sim;

    Pose6DoF pose_at(double t) const;
    /// Largest drone-anchor distance over the trajectory (sampled).
    double max_range() const;
    /// Throws ValidationError listing every violated constraint.
    void validate() const;
};

/// Serialized measurement streams of one simulated experiment.
struct MeasurementLog {
    std::uint64_t seed = 0;
    RadarConfig radar_h;
    RadarConfig radar_v;
    AnchorConfig anchor;
    NoiseModel noise;
    double chirp_rate = 20.0;
    double imu_rate = 100.0;
    double duration = 0.0;
    std::vector<BasebandFrame> frames_h;
    std::vector<BasebandFrame> frames_v;
    std::vector<ImuSample> imu;
    GroundTruthTrack truth;
};

} // namespace anchorloc
