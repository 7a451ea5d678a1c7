#include "anchorloc/simulate.hpp"

#include <cmath>

#include "anchorloc/rng.hpp"

namespace anchorloc {

namespace {

std::vector<BasebandFrame> simulate_radar(const Scenario& scn, const RadarConfig& radar,
                                          const NoiseModel& noise) {
    const double period = 1.0 / scn.chirp_rate;
    const bool is_h = radar.polarization == Polarization::Horizontal;
    // Distinct start-offset windows keep the two radars' chirp timestamps
    // interleaved and never exactly equal.
    CounterRng timing(CounterRng::derive(scn.seed, is_h ? 0x11 : 0x22, 0xC10C), 0);
    const double offset = is_h ? timing.uniform(0.0, 0.20 * period)
                               : timing.uniform(0.25 * period, 0.45 * period);

    const auto n_frames = static_cast<std::size_t>(std::floor(scn.duration * scn.chirp_rate));
    std::vector<BasebandFrame> frames;
    frames.reserve(n_frames);
    for (std::size_t k = 0; k < n_frames; ++k) {
        double jitter =
            scn.chirp_jitter > 0.0 ? timing.uniform(-scn.chirp_jitter, scn.chirp_jitter) : 0.0;
        double t = offset + static_cast<double>(k) * period + jitter;
        frames.push_back(simulate_frame(scn.pose_at(t), radar, scn.anchor, noise, t, k, scn.sim));
    }
    return frames;
}

} // namespace

MeasurementLog simulate_scenario(const Scenario& scn) {
    scn.validate();

    MeasurementLog log;
    log.seed = scn.seed;
    log.radar_h = scn.radar_h;
    log.radar_v = scn.radar_v;
    log.anchor = scn.anchor;
    log.noise = scn.noise;
    log.noise.seed = CounterRng::derive(scn.seed, 0xA0, 0x15E);
    log.chirp_rate = scn.chirp_rate;
    log.imu_rate = scn.imu_rate;
    log.duration = scn.duration;

    log.frames_h = simulate_radar(scn, scn.radar_h, log.noise);
    log.frames_v = simulate_radar(scn, scn.radar_v, log.noise);

    const auto n_imu = static_cast<std::size_t>(std::floor(scn.duration * scn.imu_rate));
    log.imu.reserve(n_imu + 1);
    for (std::size_t k = 0; k <= n_imu; ++k) {
        double t = static_cast<double>(k) / scn.imu_rate;
        log.imu.push_back({t + scn.imu_clock_offset,
                           scn.trajectory.attitude_at(t, scn.duration)});
    }

    const auto n_truth = static_cast<std::size_t>(std::floor(scn.duration * scn.truth_rate));
    log.truth.samples.reserve(n_truth + 1);
    for (std::size_t k = 0; k <= n_truth; ++k) {
        double t = static_cast<double>(k) / scn.truth_rate;
        // Truth attitude is expressed in the anchor frame, so a non-identity
        // anchor mount folds into it.
        log.truth.samples.push_back({t, scn.trajectory.position_at(t, scn.duration),
                                     rotation_to_euler(scn.pose_at(t).attitude)});
    }
    return log;
}

} // namespace anchorloc
