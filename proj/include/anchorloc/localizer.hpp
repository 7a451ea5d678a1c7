#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "anchorloc/spectrum.hpp"

namespace anchorloc {

/// Single-shot output of one radar: range, AoA angle on the radar's axis,
/// and detection quality.
struct RadarDetection {
    RadarId radar_id = RadarId::H;
    double timestamp = 0.0;     // s
    double range = 0.0;         // m, mean of both RX channels
    std::array<double, 2> range_per_channel{}; // m
    double angle = 0.0;         // rad; azimuth for H, elevation for V
    double snr = 0.0;           // linear, min of the two channels
    double delta_phi = 0.0;     // rad, wrapped to (-pi, pi]
};

/// One paired H+V shot converted to a 3D anchor fix in the flight frame.
struct Fix3D {
    double timestamp = 0.0; // midpoint of the paired detections
    Point3 point;           // anchor position in the flight frame
    SphericalFix spherical;
    double quality = 0.0;   // min of the two radar SNRs
};

struct FilterConfig {
    double snr_threshold = 4.0;      // drop when snr < threshold (strict)
    double max_rx_range_diff = 0.5;  // m, inter-channel range disagreement
    double max_pairing_gap = 0.075;  // s, H/V timestamp distance
};

struct FilterStats {
    std::size_t kept = 0;
    std::size_t dropped_snr = 0;
    std::size_t dropped_range_mismatch = 0;
};

/// Eq.-of-arrival inversion: asin(delta_phi * lambda / (2 pi d)).
/// delta_phi is wrapped to (-pi, pi] first. Throws std::domain_error when
/// the asin argument exceeds 1 in magnitude (only possible if d > lambda/2).
double angle_from_phase(double delta_phi, double rx_spacing, double wavelength);

/// Combine the matched-band peak pairs of both RX channels into a
/// detection. delta_phi compares the two channels' complex FFT values at a
/// common upper-sideband bin. Returns nullopt when either channel failed.
std::optional<RadarDetection> detect(const std::array<PeakSearch, 2>& per_channel,
                                     const Spectrum& spec, const RadarConfig& radar,
                                     double timestamp);

/// Pair an H and a V detection into a 3D fix. Throws PairingError when the
/// timestamp gap exceeds cfg.max_pairing_gap.
Fix3D combine(const RadarDetection& h, const RadarDetection& v, const FilterConfig& cfg);

/// Drop detections with snr < threshold or inter-channel range difference
/// above the limit. Order-preserving; counts drop reasons.
std::vector<RadarDetection> filter_outliers(const std::vector<RadarDetection>& detections,
                                            const FilterConfig& cfg, FilterStats* stats = nullptr);

/// Mutual-nearest pairing of the two detection streams within the gap.
std::vector<std::pair<RadarDetection, RadarDetection>>
pair_detections(const std::vector<RadarDetection>& h, const std::vector<RadarDetection>& v,
                double max_pairing_gap);

struct PairingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace anchorloc
