#include "anchorloc/localizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace anchorloc {

double angle_from_phase(double delta_phi, double rx_spacing, double wavelength) {
    double wrapped = wrap_pi(delta_phi);
    double arg = wrapped * wavelength / (2.0 * kPi * rx_spacing);
    if (std::abs(arg) > 1.0 + 1e-12)
        throw std::domain_error("angle_from_phase: |delta_phi * lambda / (2 pi d)| > 1");
    arg = std::clamp(arg, -1.0, 1.0);
    return std::asin(arg);
}

std::optional<RadarDetection> detect(const std::array<PeakSearch, 2>& per_channel,
                                     const Spectrum& spec, const RadarConfig& radar,
                                     double timestamp) {
    if (!per_channel[0].found() || !per_channel[1].found()) return std::nullopt;
    const PeakPair& p0 = per_channel[0].pair;
    const PeakPair& p1 = per_channel[1].pair;

    RadarDetection det;
    det.radar_id = radar.polarization == Polarization::Horizontal ? RadarId::H : RadarId::V;
    det.timestamp = timestamp;
    det.range_per_channel = {range_from_beat(p0.f_beat, radar.chirp_slope),
                             range_from_beat(p1.f_beat, radar.chirp_slope)};
    det.range = 0.5 * (det.range_per_channel[0] + det.range_per_channel[1]);

    // Phase compared at a common upper-sideband bin so both channels sample
    // the same frequency.
    double binw = spec.ch[0].bin_width();
    auto last = static_cast<long>(spec.ch[0].bins.size()) - 1;
    long bin = std::clamp(std::lround(0.5 * (p0.f_upper + p1.f_upper) / binw), 1l, last);
    std::complex<double> v0 = spec.ch[0].bins[static_cast<std::size_t>(bin)];
    std::complex<double> v1 = spec.ch[1].bins[static_cast<std::size_t>(bin)];
    det.delta_phi = std::arg(v0 * std::conj(v1));
    det.angle = angle_from_phase(det.delta_phi, radar.rx_spacing, radar.carrier_wavelength);
    det.snr = std::min(p0.snr, p1.snr);
    return det;
}

Fix3D combine(const RadarDetection& h, const RadarDetection& v, const FilterConfig& cfg) {
    if (std::abs(h.timestamp - v.timestamp) > cfg.max_pairing_gap)
        throw PairingError("combine: H/V timestamp gap exceeds max_pairing_gap");
    Fix3D fix;
    fix.timestamp = 0.5 * (h.timestamp + v.timestamp);
    fix.spherical.range = 0.5 * (h.range + v.range);
    fix.spherical.azimuth = h.angle;
    fix.spherical.elevation = v.angle;
    fix.point = spherical_to_point(fix.spherical);
    fix.quality = std::min(h.snr, v.snr);
    return fix;
}

std::vector<RadarDetection> filter_outliers(const std::vector<RadarDetection>& detections,
                                            const FilterConfig& cfg, FilterStats* stats) {
    std::vector<RadarDetection> kept;
    kept.reserve(detections.size());
    FilterStats local;
    for (const RadarDetection& d : detections) {
        if (d.snr < cfg.snr_threshold) { // strict: snr == threshold is kept
            ++local.dropped_snr;
            continue;
        }
        if (std::abs(d.range_per_channel[0] - d.range_per_channel[1]) > cfg.max_rx_range_diff) {
            ++local.dropped_range_mismatch;
            continue;
        }
        kept.push_back(d);
        ++local.kept;
    }
    if (stats) {
        stats->kept += local.kept;
        stats->dropped_snr += local.dropped_snr;
        stats->dropped_range_mismatch += local.dropped_range_mismatch;
    }
    return kept;
}

std::vector<std::pair<RadarDetection, RadarDetection>>
pair_detections(const std::vector<RadarDetection>& h, const std::vector<RadarDetection>& v,
                double max_pairing_gap) {
    std::vector<std::pair<RadarDetection, RadarDetection>> pairs;
    if (h.empty() || v.empty()) return pairs;

    auto nearest = [](const std::vector<RadarDetection>& xs, double t) {
        std::size_t best = 0;
        double best_gap = std::abs(xs[0].timestamp - t);
        for (std::size_t i = 1; i < xs.size(); ++i) {
            double gap = std::abs(xs[i].timestamp - t);
            if (gap < best_gap) {
                best = i;
                best_gap = gap;
            }
        }
        return best;
    };

    for (std::size_t i = 0; i < h.size(); ++i) {
        std::size_t j = nearest(v, h[i].timestamp);
        if (nearest(h, v[j].timestamp) != i) continue; // mutual nearest only
        if (std::abs(h[i].timestamp - v[j].timestamp) > max_pairing_gap) continue;
        pairs.emplace_back(h[i], v[j]);
    }
    return pairs;
}

} // namespace anchorloc
