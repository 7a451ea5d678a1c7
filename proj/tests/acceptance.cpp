// Acceptance suite: one test case per release criterion. Each prints a
// single [PASS]/[FAIL] line with the measured values.

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>

#include "anchorloc/cli.hpp"
#include "anchorloc/io.hpp"
#include "anchorloc/rng.hpp"
#include "anchorloc/simulate.hpp"
#include "anchorloc/sweep.hpp"
#include "support.hpp"

using namespace anchorloc;
using testsupport::brute_force_percentile;
using testsupport::pose_with_anchor_at;

namespace {

void report(int id, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

// Long-range anchor configuration: modulations high enough for a 10 m beat
// (>= 10x margin) with disjoint search bands.
AnchorConfig long_range_anchor() {
    AnchorConfig anchor;
    anchor.f1_mod = 150e3;
    anchor.f2_mod = 200e3;
    return anchor;
}

struct Shot {
    Fix3D fix;
    bool ok = false;
};

Shot single_shot(const SphericalFix& anchor_in_df, const EulerAngles& attitude,
                 const AnchorConfig& anchor, std::uint64_t index) {
    RadarConfig rh = RadarConfig::default_h();
    RadarConfig rv = RadarConfig::default_v();
    NoiseModel quiet;
    PipelineConfig cfg;
    std::array<SearchBand, 2> bands = cfg.make_bands(anchor);

    Pose6DoF pose = pose_with_anchor_at(anchor_in_df, attitude);
    BasebandFrame fh = simulate_frame(pose, rh, anchor, quiet, 0.0, index);
    BasebandFrame fv = simulate_frame(pose, rv, anchor, quiet, 0.002, index);
    Spectrum sh = compute_spectrum(fh, rh.sample_rate);
    Spectrum sv = compute_spectrum(fv, rv.sample_rate);
    auto hs = separate_dual_frequency(sh, bands, {anchor.f1_mod, anchor.f2_mod});
    auto vs = separate_dual_frequency(sv, bands, {anchor.f1_mod, anchor.f2_mod});
    auto dh = detect({hs[0][0], hs[1][0]}, sh, rh, 0.0);
    auto dv = detect({vs[0][1], vs[1][1]}, sv, rv, 0.002);

    Shot shot;
    if (dh && dv) {
        shot.fix = combine(*dh, *dv, FilterConfig{});
        shot.ok = true;
    }
    return shot;
}

Scenario yaw_maneuver_scenario(double duration, double amplitude_deg, double freq_hz) {
    Scenario scn;
    scn.duration = duration;
    scn.seed = 2026;
    scn.trajectory.type = Trajectory::Type::Waypoints;
    for (int k = 0; k <= static_cast<int>(duration * 4); ++k) {
        double t = 0.25 * k;
        scn.trajectory.waypoints.push_back(
            {t,
             {0.0, -2.0, 0.0},
             {0.0, 0.0, deg2rad(amplitude_deg) * std::sin(2.0 * kPi * freq_hz * t)}});
    }
    return scn;
}

} // namespace

TEST_CASE("criterion 1: scope statement") {
    report(1, true,
           "hardware-measured error tables are not reproduced at desk scale; the synthetic "
           "oracle and property checks below stand in");
    CHECK(true);
}

TEST_CASE("criterion 2: noise-free end-to-end oracle, 1000 poses") {
    AnchorConfig anchor = long_range_anchor();
    CounterRng rng(0xACCE5501, 0);
    auto start = std::chrono::steady_clock::now();

    int failures = 0;
    double worst_pos = 0.0, worst_ang = 0.0;
    const int shots = 1000;
    for (int i = 0; i < shots; ++i) {
        SphericalFix s{rng.uniform(0.5, 10.0), deg2rad(rng.uniform(-45.0, 45.0)),
                       deg2rad(rng.uniform(-45.0, 45.0))};
        EulerAngles att{deg2rad(rng.uniform(-20.0, 20.0)), deg2rad(rng.uniform(-20.0, 20.0)),
                        deg2rad(rng.uniform(-20.0, 20.0))};
        Shot shot = single_shot(s, att, anchor, static_cast<std::uint64_t>(i));
        if (!shot.ok) {
            ++failures;
            continue;
        }
        double pos_err = (shot.fix.point - spherical_to_point(s)).norm();
        double az_err = std::abs(rad2deg(shot.fix.spherical.azimuth - s.azimuth));
        double el_err = std::abs(rad2deg(shot.fix.spherical.elevation - s.elevation));
        worst_pos = std::max(worst_pos, pos_err);
        worst_ang = std::max({worst_ang, az_err, el_err});
        if (pos_err > 0.08 || az_err > 0.2 || el_err > 0.2) ++failures;
    }
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    bool pass = failures == 0 && elapsed < 60.0;
    report(2, pass,
           fmt("%d/%d fixes within 8 cm / 0.2 deg (worst %.4f m, %.4f deg), %.1f s runtime "
               "(limit 60 s)",
               shots - failures, shots, worst_pos, worst_ang, elapsed));
    CHECK(failures == 0);
    CHECK(elapsed < 60.0);
}

TEST_CASE("criterion 3: upper-sideband separation equals the modulation spacing") {
    RadarConfig radar = RadarConfig::default_v();
    AnchorConfig anchor; // 80/100 kHz defaults, 20 dB isolation
    NoiseModel quiet;
    PipelineConfig cfg;
    std::array<SearchBand, 2> bands = cfg.make_bands(anchor);
    const double sub_bin = radar.bin_width_hz() / 10.0;
    const double tolerance = 2.0 * sub_bin;

    CounterRng rng(0xACCE5503, 0);
    int ok = 0;
    double worst = 0.0;
    const int frames = 200;
    for (int i = 0; i < frames; ++i) {
        SphericalFix s{rng.uniform(0.5, 5.5), deg2rad(rng.uniform(-30.0, 30.0)),
                       deg2rad(rng.uniform(-30.0, 30.0))};
        Pose6DoF pose = pose_with_anchor_at(s);
        BasebandFrame frame = simulate_frame(pose, radar, anchor, quiet,
                                             rng.uniform(0.0, 20.0),
                                             static_cast<std::uint64_t>(i));
        Spectrum spec = compute_spectrum(frame, radar.sample_rate);
        auto res = separate_dual_frequency(spec, bands, {anchor.f1_mod, anchor.f2_mod});
        if (!res[0][0].found() || !res[0][1].found()) continue;
        double separation = res[0][1].pair.f_upper - res[0][0].pair.f_upper;
        double err = std::abs(separation - (anchor.f2_mod - anchor.f1_mod));
        worst = std::max(worst, err);
        if (err <= tolerance) ++ok;
    }
    bool pass = ok == frames;
    report(3, pass,
           fmt("%d/%d frames: |separation - 20 kHz| <= %.1f Hz (worst %.2f Hz)", ok, frames,
               tolerance, worst));
    CHECK(pass);
}

TEST_CASE("criterion 4: yaw sweep leaves the fused position fixed") {
    Scenario scn = yaw_maneuver_scenario(8.0, 45.0, 0.25);
    scn.seed = 44;
    MeasurementLog log = simulate_scenario(scn);
    PipelineConfig cfg;
    PipelineResult res = run_pipeline(log, cfg);
    REQUIRE(res.poses.size() > 100);

    double fused_dev = 0.0, raw_spread = 0.0;
    for (const Pose6DoF& pose : res.poses)
        fused_dev = std::max(fused_dev, (pose.position - scn.trajectory.position).norm());
    for (std::size_t i = 0; i < res.fixes.size(); ++i)
        for (std::size_t j = i + 1; j < res.fixes.size(); ++j)
            raw_spread = std::max(raw_spread, (res.fixes[i].point - res.fixes[j].point).norm());

    bool pass = fused_dev <= 0.08 && raw_spread >= 1.0;
    report(4, pass,
           fmt("fused position deviation %.4f m (limit 0.08), unfused flight-frame spread "
               "%.2f m (needs >= 1.0) at 2 m range",
               fused_dev, raw_spread));
    CHECK(fused_dev <= 0.08);
    CHECK(raw_spread >= 1.0);
}

TEST_CASE("criterion 5: clock-offset recovery") {
    bool all_pass = true;
    std::string details;
    for (double injected : {-0.5, 0.1, 0.37}) {
        Scenario scn = yaw_maneuver_scenario(14.0, 25.0, 0.4);
        scn.seed = 55;
        scn.imu_clock_offset = injected;
        MeasurementLog log = simulate_scenario(scn);

        PipelineConfig cfg;
        cfg.calibration.window = 0.8;
        cfg.calibration.mode = CalibrationMode::Required;
        PipelineResult res = run_pipeline(log, cfg);
        REQUIRE(res.clock_offset.has_value());
        const ClockOffset& co = *res.clock_offset;
        bool ok = std::abs(co.offset - injected) <= co.grid_step + 1e-12 && co.confidence > 0.9;
        all_pass = all_pass && ok;
        details += fmt("%+.3f->%+.4f (conf %.3f) ", injected, co.offset, co.confidence);
        CHECK(std::abs(co.offset - injected) <= co.grid_step + 1e-12);
        CHECK(co.confidence > 0.9);
    }
    report(5, all_pass, "injected->recovered offsets within one grid step: " + details);
}

TEST_CASE("criterion 6: outlier filter strictly improves the 90th percentile") {
    Scenario scn;
    scn.duration = 10.0;
    scn.seed = 66;
    scn.trajectory.position = {0.2, -2.5, 0.1};
    scn.noise.noise_power = 140.0; // moderate: most shots live, outliers occur

    // Detection-stage gate open so raw outliers reach the filter stage; the
    // filter itself carries the default threshold.
    PipelineConfig unfiltered;
    unfiltered.band.snr_threshold = 0.0;
    unfiltered.filter.snr_threshold = 0.0;
    unfiltered.filter.max_rx_range_diff = std::numeric_limits<double>::infinity();

    PipelineConfig filtered = unfiltered;
    filtered.filter.snr_threshold = 4.0; // default P_thresh
    filtered.filter.max_rx_range_diff = 0.5;

    std::vector<double> err_unfiltered, err_filtered;
    std::size_t shots = 0, kept = 0;
    for (int trial = 0; trial < 3; ++trial) {
        Scenario s = scn;
        s.seed = CounterRng::derive(scn.seed, 0xF11, static_cast<std::uint64_t>(trial));
        MeasurementLog log = simulate_scenario(s);
        shots += std::min(log.frames_h.size(), log.frames_v.size());

        for (const Pose6DoF& pose : run_pipeline(log, unfiltered).poses) {
            auto truth = log.truth.interpolate(pose.timestamp);
            if (truth) err_unfiltered.push_back((pose.position - truth->position).norm());
        }
        PipelineResult fres = run_pipeline(log, filtered);
        kept += fres.poses.size();
        for (const Pose6DoF& pose : fres.poses) {
            auto truth = log.truth.interpolate(pose.timestamp);
            if (truth) err_filtered.push_back((pose.position - truth->position).norm());
        }
    }
    REQUIRE(!err_unfiltered.empty());
    REQUIRE(!err_filtered.empty());
    double p90_unfiltered = nearest_rank_percentile(err_unfiltered, 90.0);
    double p90_filtered = nearest_rank_percentile(err_filtered, 90.0);
    double yield = static_cast<double>(kept) / static_cast<double>(shots);

    bool pass = p90_filtered < p90_unfiltered && yield >= 0.5;
    report(6, pass,
           fmt("p90 filtered %.4f m < unfiltered %.4f m; yield %.1f%% of %zu shots (needs >= "
               "50%%)",
               p90_filtered, p90_unfiltered, 100.0 * yield, shots));
    CHECK(p90_filtered < p90_unfiltered);
    CHECK(yield >= 0.5);
}

TEST_CASE("criterion 7: residual power tracks the polarization isolation") {
    const double inf = std::numeric_limits<double>::infinity();
    PipelineConfig cfg;
    double median_inf = 0.0, median_20 = 0.0;
    bool ratios_ok = true;
    std::string details;

    for (double iso : {inf, 20.0, 10.0}) {
        Scenario scn;
        scn.duration = 5.0;
        scn.seed = 77;
        scn.trajectory.position = {0.0, -3.0, 0.0};
        scn.anchor.cross_pol_isolation_db = iso;
        MeasurementLog log = simulate_scenario(scn);
        PipelineResult res = run_pipeline(log, cfg);
        REQUIRE(!res.poses.empty());

        std::vector<double> errors;
        for (const Pose6DoF& pose : res.poses) {
            auto truth = log.truth.interpolate(pose.timestamp);
            if (truth) errors.push_back((pose.position - truth->position).norm());
        }
        double median_err = nearest_rank_percentile(errors, 50.0);
        if (std::isinf(iso)) median_inf = median_err;
        if (iso == 20.0) median_20 = median_err;

        // Residual measured in the V radar's frames: matched f2 band vs the
        // attenuated f1 band.
        if (std::isinf(iso)) {
            bool none_found = true;
            for (const auto& d : res.diagnostics_v) none_found = none_found && !d.mismatched_found;
            ratios_ok = ratios_ok && none_found;
            details += "inf: no residual; ";
        } else {
            double worst_dev = 0.0;
            for (const auto& d : res.diagnostics_v) {
                if (!d.mismatched_found || d.matched_power <= 0.0) continue;
                double ratio_db = 10.0 * std::log10(d.matched_power / d.mismatched_power);
                worst_dev = std::max(worst_dev, std::abs(ratio_db - iso));
            }
            ratios_ok = ratios_ok && worst_dev <= 1.0;
            details += fmt("%.0f dB: dev %.2f dB; ", iso, worst_dev);
        }
    }

    bool localization_unchanged = std::abs(median_inf - median_20) <= 0.08;
    bool pass = ratios_ok && localization_unchanged;
    report(7, pass,
           details + fmt("median error inf vs 20 dB: %.4f vs %.4f m (within 0.08)", median_inf,
                         median_20));
    CHECK(ratios_ok);
    CHECK(localization_unchanged);
}

TEST_CASE("criterion 8: determinism and round trips") {
    Scenario scn;
    scn.duration = 3.0;
    scn.seed = 88;
    scn.noise.noise_power = 1.0;
    scn.trajectory.position = {0.1, -2.0, -0.1};

    std::string log_a = io::log_to_string(simulate_scenario(scn));
    std::string log_b = io::log_to_string(simulate_scenario(scn));
    bool logs_identical = log_a == log_b;

    MeasurementLog parsed = io::log_from_string(log_a);
    bool round_trip_exact = io::log_to_string(parsed) == log_a;

    PipelineConfig cfg;
    ErrorReport rep_a = evaluate(run_pipeline(parsed, cfg).poses, parsed.truth);
    ErrorReport rep_b = evaluate(run_pipeline(parsed, cfg).poses, parsed.truth);
    bool reports_identical =
        io::report_to_json(rep_a).dump() == io::report_to_json(rep_b).dump();

    CounterRng rng(0xACCE5508, 0);
    int pctl_matches = 0;
    const int arrays = 10000;
    for (int i = 0; i < arrays; ++i) {
        std::size_t n = 1 + static_cast<std::size_t>(rng.uniform(0, 50));
        std::vector<double> values;
        for (std::size_t k = 0; k < n; ++k) values.push_back(rng.uniform(-1e3, 1e3));
        double pct = rng.uniform(0.1, 100.0);
        if (nearest_rank_percentile(values, pct) == brute_force_percentile(values, pct))
            ++pctl_matches;
    }

    bool pass = logs_identical && round_trip_exact && reports_identical &&
                pctl_matches == arrays;
    report(8, pass,
           fmt("seed-identical logs: %s; byte-exact log round trip: %s; identical reports: %s; "
               "percentile oracle %d/%d",
               logs_identical ? "yes" : "NO", round_trip_exact ? "yes" : "NO",
               reports_identical ? "yes" : "NO", pctl_matches, arrays));
    CHECK(logs_identical);
    CHECK(round_trip_exact);
    CHECK(reports_identical);
    CHECK(pctl_matches == arrays);
}

TEST_CASE("criterion 9: metric arithmetic") {
    // Truth pinned at the origin keeps the 0.03/0.04 legs exact in binary,
    // so the 3-4-5 hypotenuse must come out bit-equal to 0.05.
    GroundTruthTrack truth;
    for (int k = 0; k <= 20; ++k)
        truth.samples.push_back({0.1 * k, {0.0, 0.0, 0.0}, {0.0, 0.0, deg2rad(1.0)}});

    std::vector<Pose6DoF> poses = {
        {1.0, {0.03, 0.04, 0.0}, euler_to_rotation({0.0, 0.0, deg2rad(359.0)})}};
    ErrorReport rep = evaluate(poses, truth);

    bool l2_exact = rep.l2_m.p50 == 0.05;
    bool yaw_exact = std::abs(rep.yaw_deg.p50 - 2.0) < 1e-9;
    bool pass = l2_exact && yaw_exact;
    report(9, pass,
           fmt("3-4-5 offset -> %.17g m (expect 0.05 exactly); yaw 359 vs 1 -> %.12f deg "
               "(expect 2)",
               rep.l2_m.p50, rep.yaw_deg.p50));
    CHECK(l2_exact);
    CHECK(yaw_exact);
}
