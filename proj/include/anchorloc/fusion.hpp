#pragma once

#include <optional>

#include "anchorloc/localizer.hpp"
#include "anchorloc/scenario.hpp"

namespace anchorloc {

struct CalibrationFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExtrapolationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// IMU clock minus radar clock, recovered by correlating yaw rate against
/// azimuth rate.
struct ClockOffset {
    double offset = 0.0;     // s
    double confidence = 0.0; // peak normalized correlation, in [-1, 1]
    double grid_step = 0.0;  // s, resolution of the lag search
};

/// Search the lag in [-window, window] maximizing the normalized
/// cross-correlation between the IMU yaw rate and the H-radar azimuth rate.
/// Grid step is min(IMU period, radar period)/4. Throws CalibrationFailed
/// when the streams barely overlap, no rotation maneuver is present, or the
/// peak correlation stays below min_confidence.
ClockOffset calibrate_offset(const std::vector<ImuSample>& imu,
                             const std::vector<RadarDetection>& h_detections, double window,
                             double min_confidence = 0.5);

/// Per-angle linear interpolation with shortest-arc wrap handling; exact at
/// sample times. Throws ExtrapolationError outside the stream span.
EulerAngles interpolate_attitude(const std::vector<ImuSample>& imu, double t);

/// Rotate the flight-frame anchor fix into the drone-world frame, negate to
/// obtain the drone position, and compose the attitude with the anchor
/// mount rotation (identity by default).
Pose6DoF fuse(const Fix3D& fix, const EulerAngles& attitude,
              const Rotation& anchor_mount = Rotation::identity(),
              const Point3& anchor_position = {});

enum class CalibrationMode { Auto, Off, Required };

struct BandSettings {
    double half_width_hz = 0.0; // 0: derived as 0.45 * |f2 - f1|
    int guard_bins = 3;
    double snr_threshold = 4.0;
    double symmetry_tol_bins = 2.0;
};

struct CalibrationSettings {
    CalibrationMode mode = CalibrationMode::Auto;
    double window = 1.0;          // s
    double min_confidence = 0.5;
    double fallback_offset = 0.0; // s, used when calibration is off or fails
};

struct PipelineConfig {
    BandSettings band;
    FilterConfig filter;            // max_pairing_gap <= 0: derived as 1.5 / chirp_rate
    CalibrationSettings calibration;
    Rotation anchor_mount = Rotation::identity();

    std::array<SearchBand, 2> make_bands(const AnchorConfig& anchor) const;
    double pairing_gap(double chirp_rate) const;
};

struct RadarDropStats {
    std::size_t frames = 0;
    std::size_t no_detection = 0;
    std::size_t ambiguous = 0;
    FilterStats filter;
};

struct DropStats {
    RadarDropStats h;
    RadarDropStats v;
    std::size_t paired = 0;
    std::size_t unpaired_h = 0;
    std::size_t unpaired_v = 0;
    std::size_t attitude_out_of_span = 0;
    std::size_t poses = 0;
};

/// Per-frame matched/mismatched band power, for interference diagnostics.
struct BandDiagnostics {
    double timestamp = 0.0;
    double matched_power = 0.0;
    double mismatched_power = 0.0;
    bool mismatched_found = false;
};

struct PipelineResult {
    std::vector<Pose6DoF> poses;
    std::vector<Fix3D> fixes; // unfused flight-frame fixes, same order
    DropStats stats;
    std::optional<ClockOffset> clock_offset; // present when calibration ran and succeeded
    double applied_offset = 0.0;
    std::vector<BandDiagnostics> diagnostics_h;
    std::vector<BandDiagnostics> diagnostics_v;
};

/// Full composition: spectra -> peak pairs -> detections -> outlier filter
/// -> H/V pairing -> 3D fix -> attitude interpolation -> 6DoF pose.
/// Single-shot failures are counted, never fatal.
PipelineResult run_pipeline(const MeasurementLog& log, const PipelineConfig& cfg);

/// Run only the H-radar detection pass and the clock-offset correlation.
ClockOffset calibrate_from_log(const MeasurementLog& log, const PipelineConfig& cfg);

} // namespace anchorloc
