#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>

#include "anchorloc/rng.hpp"
#include "anchorloc/spectrum.hpp"
#include "support.hpp"

using namespace anchorloc;
using testsupport::pose_with_anchor_at;
using testsupport::windowed_dtft;

namespace {

BasebandFrame tone_frame(std::size_t n, double sample_rate,
                         const std::vector<std::pair<double, double>>& tones) {
    BasebandFrame f;
    f.rx[0].assign(n, {0.0, 0.0});
    f.rx[1].assign(n, {0.0, 0.0});
    for (auto [freq, amp] : tones) {
        for (std::size_t i = 0; i < n; ++i) {
            double ph = 2.0 * kPi * freq * static_cast<double>(i) / sample_rate;
            std::complex<double> s{amp * std::cos(ph), amp * std::sin(ph)};
            f.rx[0][i] += s;
            f.rx[1][i] += s;
        }
    }
    return f;
}

// Single-bin peaks on an exact grid; parabolic refinement stays put.
ChannelSpectrum constructed_spectrum(std::size_t n, double binw,
                                     const std::vector<std::pair<int, double>>& bin_power) {
    ChannelSpectrum spec;
    spec.bin_hz.resize(n);
    spec.power.assign(n, 0.0);
    spec.bins.assign(n, {0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k) spec.bin_hz[k] = binw * static_cast<double>(k);
    for (auto [k, p] : bin_power) {
        spec.power[static_cast<std::size_t>(k)] = p;
        spec.bins[static_cast<std::size_t>(k)] = {std::sqrt(p), 0.0};
    }
    return spec;
}

} // namespace

TEST_CASE("compute_spectrum: pure tone lands on its bin") {
    const double fs = 2e6;
    const std::size_t n = 2048;
    const double binw = fs / static_cast<double>(n);

    BasebandFrame f = tone_frame(n, fs, {{binw * 300.0, 1.0}});
    Spectrum spec = compute_spectrum(f, fs);
    auto it = std::max_element(spec.ch[0].power.begin(), spec.ch[0].power.end());
    CHECK(it - spec.ch[0].power.begin() == 300);
    CHECK(spec.ch[0].bin_hz[300] == doctest::Approx(binw * 300.0));
}

TEST_CASE("compute_spectrum: zero input gives zero magnitudes, DC is removed") {
    BasebandFrame f;
    f.rx[0].assign(256, {0.0, 0.0});
    f.rx[1].assign(256, {0.0, 0.0});
    Spectrum spec = compute_spectrum(f, 1e6);
    for (double p : spec.ch[0].power) CHECK(p == 0.0);

    BasebandFrame dc;
    dc.rx[0].assign(256, {3.0, -1.0});
    dc.rx[1].assign(256, {3.0, -1.0});
    Spectrum dspec = compute_spectrum(dc, 1e6);
    CHECK(dspec.ch[0].power[0] == 0.0);
}

TEST_CASE("compute_spectrum: 106666.67 Hz tone peaks at bin 109 (2 MHz, N=2048)") {
    BasebandFrame f = tone_frame(2048, 2e6, {{106666.67, 1.0}});
    Spectrum spec = compute_spectrum(f, 2e6);
    auto it = std::max_element(spec.ch[0].power.begin(), spec.ch[0].power.end());
    CHECK(it - spec.ch[0].power.begin() == 109);
}

TEST_CASE("compute_spectrum matches a naive DFT and Parseval") {
    const std::size_t n = 128;
    const double fs = 1e5;
    CounterRng rng(3, 9);
    BasebandFrame f = tone_frame(n, fs, {{fs * 10.5 / n, 1.0}, {fs * 33.0 / n, 0.3}});
    for (auto& s : f.rx[0]) s += std::complex<double>(0.01 * rng.uniform(-1, 1), 0.01 * rng.uniform(-1, 1));
    f.rx[1] = f.rx[0];

    Spectrum spec = compute_spectrum(f, fs);
    double input_energy = 0.0; // windowed, DC component removed like the FFT path
    std::complex<double> dc = windowed_dtft(f.rx[0], 0.0, fs);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> ref =
            k == 0 ? std::complex<double>{0.0, 0.0}
                   : windowed_dtft(f.rx[0], spec.ch[0].bin_hz[k], fs);
        CHECK(std::abs(ref - spec.ch[0].bins[k]) < 1e-6 * (1.0 + std::abs(ref)));
    }
    std::size_t i = 0;
    for (const auto& s : f.rx[0]) {
        double w = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i++) / static_cast<double>(n));
        input_energy += std::norm(s * w);
    }
    input_energy -= std::norm(dc) / static_cast<double>(n);
    double spectrum_energy = 0.0;
    for (double p : spec.ch[0].power) spectrum_energy += p;
    spectrum_energy /= static_cast<double>(n);
    CHECK(spectrum_energy == doctest::Approx(input_energy).epsilon(1e-6));
}

TEST_CASE("range_from_beat worked values") {
    CHECK(range_from_beat(0.0, 2e11) == 0.0);
    // Forward/backward consistency at 5 m and 3.75 m.
    const double k = 2e11;
    double fb5 = 2.0 * k * 5.0 / kSpeedOfLight;
    CHECK(range_from_beat(fb5, k) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(fb5 == doctest::Approx(6666.67).epsilon(2e-3)); // ~6.67 kHz beat
    CHECK(range_from_beat(5000.0, k) == doctest::Approx(3.75).epsilon(2e-3));
    CHECK_THROWS_AS((void)range_from_beat(-1.0, k), std::domain_error);
    CHECK_THROWS_AS((void)range_from_beat(1.0, 0.0), std::domain_error);
}

TEST_CASE("find_peak_pair: clean constructed pair at 95/105 kHz") {
    // 1 kHz grid so the peaks sit exactly on bins.
    ChannelSpectrum spec = constructed_spectrum(2048, 1000.0, {{95, 50.0}, {105, 50.0}});
    SearchBand band;
    band.f_lo = 85e3;
    band.f_hi = 115e3;
    PeakSearch res = find_peak_pair(spec, band, 100e3);
    REQUIRE(res.found());
    CHECK(res.pair.f_lower == doctest::Approx(95e3).epsilon(1e-9));
    CHECK(res.pair.f_upper == doctest::Approx(105e3).epsilon(1e-9));
    CHECK(res.pair.f_anchor_est == doctest::Approx(100e3).epsilon(1e-9));
    CHECK(res.pair.f_beat == doctest::Approx(5e3).epsilon(1e-9));
}

TEST_CASE("find_peak_pair: constructed SNR equals 10") {
    // Signal power 100 split across the two peak bins; residual power 10
    // spread over the 7 in-band bins outside the guard windows.
    std::vector<std::pair<int, double>> bins = {{95, 50.0}, {105, 50.0}};
    for (int k : {90, 91, 99, 100, 101, 109, 110}) bins.push_back({k, 10.0 / 7.0});
    ChannelSpectrum spec = constructed_spectrum(2048, 1000.0, bins);
    SearchBand band;
    band.f_lo = 90e3;
    band.f_hi = 110e3;
    band.guard_bins = 3;
    PeakSearch res = find_peak_pair(spec, band, 100e3);
    REQUIRE(res.found());
    CHECK(res.pair.snr == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("find_peak_pair: noise-only band yields NoDetection") {
    CounterRng rng(21, 4);
    std::vector<std::pair<int, double>> bins;
    for (int k = 80; k <= 120; ++k) bins.push_back({k, rng.uniform(0.5, 1.5)});
    ChannelSpectrum spec = constructed_spectrum(2048, 1000.0, bins);
    SearchBand band;
    band.f_lo = 85e3;
    band.f_hi = 115e3;
    PeakSearch res = find_peak_pair(spec, band, 100e3);
    CHECK(res.status == PeakSearch::Status::no_detection);
}

TEST_CASE("find_peak_pair: strong asymmetric pair is flagged ambiguous") {
    // Midpoint 97 kHz sits 3 bins from the nominal 100 kHz (tolerance 2).
    ChannelSpectrum spec = constructed_spectrum(2048, 1000.0, {{95, 50.0}, {99, 50.0}});
    SearchBand band;
    band.f_lo = 85e3;
    band.f_hi = 115e3;
    PeakSearch res = find_peak_pair(spec, band, 100e3);
    CHECK(res.status == PeakSearch::Status::ambiguous);
}

TEST_CASE("find_peak_pair validates the band") {
    ChannelSpectrum spec = constructed_spectrum(2048, 1000.0, {{95, 50.0}, {105, 50.0}});
    SearchBand inverted;
    inverted.f_lo = 115e3;
    inverted.f_hi = 85e3;
    CHECK_THROWS_AS((void)find_peak_pair(spec, inverted, 100e3), std::invalid_argument);

    SearchBand no_guard;
    no_guard.f_lo = 85e3;
    no_guard.f_hi = 115e3;
    no_guard.guard_bins = 0;
    CHECK_THROWS_AS((void)find_peak_pair(spec, no_guard, 100e3), std::invalid_argument);

    SearchBand sliver;
    sliver.f_lo = 100e3;
    sliver.f_hi = 101e3;
    CHECK_THROWS_AS((void)find_peak_pair(spec, sliver, 100e3), std::invalid_argument);
}

TEST_CASE("separate_dual_frequency rejects overlapping bands") {
    BasebandFrame f = tone_frame(2048, 2e6, {{100e3, 1.0}});
    Spectrum spec = compute_spectrum(f, 2e6);
    std::array<SearchBand, 2> bands = {SearchBand::centered(80e3, 15e3),
                                       SearchBand::centered(100e3, 15e3)};
    CHECK_THROWS_AS((void)separate_dual_frequency(spec, bands, {80e3, 100e3}),
                    std::invalid_argument);
}

TEST_CASE("separate_dual_frequency: dual-band frame, Eq-style separation") {
    // r = 3.75 m with 80/100 kHz modulation: matched peaks near 100 +- 5 kHz,
    // residual near 80 +- 5 kHz, upper peaks separated by f2 - f1.
    RadarConfig radar = RadarConfig::default_v();
    AnchorConfig anchor; // 80/100 kHz, 20 dB isolation
    NoiseModel quiet;
    Pose6DoF pose = pose_with_anchor_at({3.75, 0.0, 0.0});
    BasebandFrame frame = simulate_frame(pose, radar, anchor, quiet, 0.0, 0);
    Spectrum spec = compute_spectrum(frame, radar.sample_rate);

    std::array<SearchBand, 2> bands = {SearchBand::centered(80e3, 9e3),
                                       SearchBand::centered(100e3, 9e3)};
    auto res = separate_dual_frequency(spec, bands, {80e3, 100e3});
    REQUIRE(res[0][0].found()); // mismatched H antenna set, attenuated
    REQUIRE(res[0][1].found()); // matched V antenna set

    const double fb = radar.beat_frequency(3.75);
    CHECK(std::abs(res[0][1].pair.f_upper - (100e3 + fb)) < 30.0); // within 0.03 bins
    CHECK(std::abs(res[0][1].pair.f_lower - (100e3 - fb)) < 30.0);
    double separation = res[0][1].pair.f_upper - res[0][0].pair.f_upper;
    const double sub_bin = radar.bin_width_hz() / 10.0;
    CHECK(std::abs(separation - 20e3) < 2.0 * sub_bin);

    // 20 dB isolation: matched band SNR about 100x the mismatched band's.
    double ratio_db = 10.0 * std::log10(res[0][1].pair.peak_power / res[0][0].pair.peak_power);
    CHECK(ratio_db == doctest::Approx(20.0).epsilon(0.05));
}

TEST_CASE("range oracle: noise-free sub-bin accuracy across 0.5-10 m") {
    // Single antenna set (infinite isolation), 150 kHz modulation so the
    // band accommodates a 10 m beat while staying clear of its twin.
    RadarConfig radar = RadarConfig::default_h();
    AnchorConfig anchor;
    anchor.f1_mod = 150e3;
    anchor.f2_mod = 300e3;
    anchor.cross_pol_isolation_db = std::numeric_limits<double>::infinity();
    NoiseModel quiet;
    SearchBand band = SearchBand::centered(150e3, 16e3);

    const double bin_range = kSpeedOfLight * radar.bin_width_hz() / (2.0 * radar.chirp_slope);
    const double tolerance = 0.1 * bin_range; // 0.073 m at defaults
    CounterRng rng(20250811, 0);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        double r_true = rng.uniform(0.5, 10.0);
        Pose6DoF pose = pose_with_anchor_at({r_true, 0.0, 0.0});
        BasebandFrame frame =
            simulate_frame(pose, radar, anchor, quiet, rng.uniform(0.0, 10.0),
                           static_cast<std::uint64_t>(trial));
        Spectrum spec = compute_spectrum(frame, radar.sample_rate);
        PeakSearch res = find_peak_pair(spec.ch[0], band, anchor.f1_mod);
        REQUIRE(res.found());
        double err = std::abs(range_from_beat(res.pair.f_beat, radar.chirp_slope) - r_true);
        worst = std::max(worst, err);
        CHECK(err <= tolerance);
    }
    MESSAGE("worst range error: ", worst, " m (tolerance ", tolerance, ")");
}

TEST_CASE("SNR decreases as noise power rises") {
    RadarConfig radar = RadarConfig::default_h();
    AnchorConfig anchor;
    SearchBand band = SearchBand::centered(80e3, 9e3);
    Pose6DoF pose = pose_with_anchor_at({3.0, 0.2, -0.1});

    double previous = std::numeric_limits<double>::infinity();
    for (double power : {0.05, 0.5, 5.0, 50.0}) {
        NoiseModel noise{power, 99};
        double mean_snr = 0.0;
        int found = 0;
        for (std::uint64_t i = 0; i < 20; ++i) {
            BasebandFrame frame =
                simulate_frame(pose, radar, anchor, noise, static_cast<double>(i) * 0.05, i);
            Spectrum spec = compute_spectrum(frame, radar.sample_rate);
            PeakSearch res = find_peak_pair(spec.ch[0], band, anchor.f1_mod);
            if (res.found()) {
                mean_snr += res.pair.snr;
                ++found;
            }
        }
        REQUIRE(found > 0);
        mean_snr /= found;
        CHECK(mean_snr < previous);
        previous = mean_snr;
    }
}
