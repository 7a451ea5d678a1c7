#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "anchorloc/geometry.hpp"

namespace anchorloc {

enum class Polarization { Horizontal, Vertical };
enum class AoaAxis { Azimuth, Elevation };
enum class RadarId { H, V };

inline const char* to_string(RadarId id) { return id == RadarId::H ? "H" : "V"; }

/// FMCW front-end parameters of one radar.
struct RadarConfig {
    double carrier_wavelength = 0.01249;  // m (24 GHz)
    double chirp_slope = 2.0e11;          // Hz/s
    double chirp_duration = 1.024e-3;     // s
    double sample_rate = 2.0e6;           // Hz
    std::size_t samples_per_frame = 2048;
    double rx_spacing = 0.01249 / 2.0;    // m, <= lambda/2 for unambiguous AoA
    Polarization polarization = Polarization::Horizontal;
    AoaAxis aoa_axis = AoaAxis::Azimuth;

    double bin_width_hz() const { return sample_rate / static_cast<double>(samples_per_frame); }
    /// Beat frequency produced by a target at range r (2kr/c).
    double beat_frequency(double range) const { return 2.0 * chirp_slope * range / kSpeedOfLight; }
    /// Range producing beat frequency f (c*f/2k).
    double range_from_beat(double f_beat) const {
        return kSpeedOfLight * f_beat / (2.0 * chirp_slope);
    }

    static RadarConfig default_h();
    static RadarConfig default_v();
    /// Throws std::invalid_argument listing any violated invariant.
    void validate() const;
};

/// Backscatter anchor: two orthogonally polarized antenna sets, each
/// modulating the reflection at its own frequency.
struct AnchorConfig {
    Point3 position;                      // anchor frame origin
    double f1_mod = 80e3;                 // Hz, horizontal antenna set
    double f2_mod = 100e3;                // Hz, vertical antenna set
    double cross_pol_isolation_db = 20.0; // power suppression of mismatched polarization;
                                          // +inf zeroes the mismatched contribution exactly
    double reflection_gain = 1.0;         // linear amplitude

    double modulation_for(Polarization p) const {
        return p == Polarization::Horizontal ? f1_mod : f2_mod;
    }
    /// Amplitude factor applied to the antenna set whose polarization does
    /// not match the interrogating radar.
    double mismatch_amplitude() const {
        if (std::isinf(cross_pol_isolation_db)) return 0.0;
        return std::pow(10.0, -cross_pol_isolation_db / 20.0);
    }
    void validate() const;
};

/// Per-sample circular complex Gaussian noise.
struct NoiseModel {
    double noise_power = 0.0; // linear variance per complex sample
    std::uint64_t seed = 0;
};

/// Dechirped IF samples of one chirp: two RX channels per radar.
struct BasebandFrame {
    RadarId radar_id = RadarId::H;
    double timestamp = 0.0; // s
    bool anchor_visible = true;
    std::array<std::vector<std::complex<double>>, 2> rx;
};

struct SimOptions {
    /// When true, amplitudes fall off as (1m / r)^2 (1/r^4 in power).
    bool range_path_loss = false;
    /// Anchor mount rotation: drone-world frame -> anchor frame.
    Rotation anchor_mount = Rotation::identity();
};

/// Synthesize the dechirped baseband frame a radar observes for a drone at
/// `pose`. Both anchor antenna sets contribute a symmetric sideband pair at
/// f_mod +- 2kr/c; the mismatched-polarization set is attenuated by the
/// configured isolation. If the anchor is outside the forward field of view
/// the frame carries noise only and is flagged.
BasebandFrame simulate_frame(const Pose6DoF& pose, const RadarConfig& radar,
                             const AnchorConfig& anchor, const NoiseModel& noise, double t,
                             std::uint64_t frame_index, const SimOptions& opts = {});

/// Anchor direction in the drone flight frame for a given pose.
/// Throws std::domain_error when the anchor is behind the radar.
SphericalFix anchor_in_flight_frame(const Pose6DoF& pose, const AnchorConfig& anchor);

} // namespace anchorloc
