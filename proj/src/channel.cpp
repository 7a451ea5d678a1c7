#include "anchorloc/channel.hpp"

#include <stdexcept>

#include "anchorloc/rng.hpp"

namespace anchorloc {

RadarConfig RadarConfig::default_h() {
    RadarConfig c;
    c.polarization = Polarization::Horizontal;
    c.aoa_axis = AoaAxis::Azimuth;
    return c;
}

RadarConfig RadarConfig::default_v() {
    RadarConfig c;
    c.polarization = Polarization::Vertical;
    c.aoa_axis = AoaAxis::Elevation;
    return c;
}

void RadarConfig::validate() const {
    std::string issues;
    if (!(chirp_slope > 0.0)) issues += "chirp_slope must be > 0; ";
    if (!(carrier_wavelength > 0.0)) issues += "carrier_wavelength must be > 0; ";
    if (!(rx_spacing > 0.0)) issues += "rx_spacing must be > 0; ";
    if (rx_spacing > carrier_wavelength / 2.0 + 1e-15)
        issues += "rx_spacing must be <= carrier_wavelength/2 for unambiguous AoA; ";
    if (!(sample_rate > 0.0)) issues += "sample_rate must be > 0; ";
    if (samples_per_frame < 8) issues += "samples_per_frame must be >= 8; ";
    if (sample_rate * chirp_duration + 1e-9 < static_cast<double>(samples_per_frame))
        issues += "sample_rate * chirp_duration must cover samples_per_frame; ";
    if (!issues.empty()) throw std::invalid_argument("RadarConfig: " + issues);
}

void AnchorConfig::validate() const {
    std::string issues;
    if (f1_mod == f2_mod) issues += "f1_mod and f2_mod must differ; ";
    if (!(f1_mod > 0.0) || !(f2_mod > 0.0)) issues += "modulation frequencies must be > 0; ";
    if (!(cross_pol_isolation_db >= 0.0)) issues += "cross_pol_isolation_db must be >= 0; ";
    if (!issues.empty()) throw std::invalid_argument("AnchorConfig: " + issues);
}

SphericalFix anchor_in_flight_frame(const Pose6DoF& pose, const AnchorConfig& anchor) {
    // Anchor position expressed in the flight frame: v_df = R_df_a^T * (p_anch_a - p_drone_a).
    Point3 rel = anchor.position - pose.position;
    Point3 in_df = pose.attitude.transposed() * rel;
    return point_to_spherical(in_df);
}

BasebandFrame simulate_frame(const Pose6DoF& pose, const RadarConfig& radar,
                             const AnchorConfig& anchor, const NoiseModel& noise, double t,
                             std::uint64_t frame_index, const SimOptions& opts) {
    BasebandFrame frame;
    frame.radar_id = radar.polarization == Polarization::Horizontal ? RadarId::H : RadarId::V;
    frame.timestamp = t;

    SphericalFix sph{};
    try {
        sph = anchor_in_flight_frame(pose, anchor);
    } catch (const std::domain_error&) {
        frame.anchor_visible = false;
    }
    if (frame.anchor_visible &&
        (std::abs(sph.azimuth) > kPi / 2.0 || std::abs(sph.elevation) > kPi / 2.0)) {
        frame.anchor_visible = false;
    }

    const std::size_t n = radar.samples_per_frame;
    frame.rx[0].assign(n, {0.0, 0.0});
    frame.rx[1].assign(n, {0.0, 0.0});

    if (frame.anchor_visible) {
        const double r = sph.range;
        const double alpha = radar.aoa_axis == AoaAxis::Azimuth ? sph.azimuth : sph.elevation;
        const double f_beat = radar.beat_frequency(r);
        // Channel 1 sits farther along the positive AoA axis, so its signal
        // lags channel 0 by the geometric phase.
        const double dphi_geo =
            2.0 * kPi * radar.rx_spacing * std::sin(alpha) / radar.carrier_wavelength;
        const double carrier_phase = -4.0 * kPi * r / radar.carrier_wavelength;
        double gain = anchor.reflection_gain;
        if (opts.range_path_loss) gain *= 1.0 / (r * r);

        struct AntennaSet {
            double f_mod;
            double amplitude;
        };
        const AntennaSet sets[2] = {
            {anchor.f1_mod, gain * (radar.polarization == Polarization::Horizontal
                                        ? 1.0
                                        : anchor.mismatch_amplitude())},
            {anchor.f2_mod, gain * (radar.polarization == Polarization::Vertical
                                        ? 1.0
                                        : anchor.mismatch_amplitude())},
        };

        for (const AntennaSet& set : sets) {
            if (set.amplitude == 0.0) continue;
            // Modulator phase at the chirp start keeps the switch continuous
            // across frames; the sideband pair straddles it symmetrically.
            const double mod_phase = std::fmod(2.0 * kPi * set.f_mod * t, 2.0 * kPi);
            const double f_up = set.f_mod + f_beat;
            const double f_lo = set.f_mod - f_beat;
            for (int ch = 0; ch < 2; ++ch) {
                const double ch_phase = carrier_phase - (ch == 1 ? dphi_geo : 0.0);
                auto& samples = frame.rx[ch];
                for (std::size_t i = 0; i < n; ++i) {
                    const double ts = static_cast<double>(i) / radar.sample_rate;
                    const double up = 2.0 * kPi * f_up * ts + ch_phase + mod_phase;
                    const double lo = 2.0 * kPi * f_lo * ts + ch_phase - mod_phase;
                    samples[i] += set.amplitude *
                                  (std::complex<double>(std::cos(up), std::sin(up)) +
                                   std::complex<double>(std::cos(lo), std::sin(lo)));
                }
            }
        }
    }

    if (noise.noise_power > 0.0) {
        const double sigma = std::sqrt(noise.noise_power / 2.0);
        const std::uint64_t radar_tag = frame.radar_id == RadarId::H ? 1 : 2;
        for (int ch = 0; ch < 2; ++ch) {
            CounterRng rng(CounterRng::derive(noise.seed, frame_index, radar_tag),
                           static_cast<std::uint64_t>(ch));
            for (std::size_t i = 0; i < n; ++i) {
                auto [re, im] = rng.gaussian_pair();
                frame.rx[ch][i] += std::complex<double>(sigma * re, sigma * im);
            }
        }
    }

    return frame;
}

} // namespace anchorloc
