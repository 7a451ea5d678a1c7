#pragma once

// Shared test fixtures and independent oracles. Oracles here must not reuse
// the library's FFT/search path they are checking.

#include <complex>
#include <vector>

#include "anchorloc/channel.hpp"
#include "anchorloc/geometry.hpp"

namespace testsupport {

using namespace anchorloc;

/// Drone pose such that the anchor (at the origin) sits at the given
/// flight-frame spherical position when the attitude is zero.
inline Pose6DoF pose_with_anchor_at(const SphericalFix& s, const EulerAngles& attitude = {}) {
    Pose6DoF pose;
    Point3 anchor_in_df = spherical_to_point(s);
    pose.attitude = euler_to_rotation(attitude);
    pose.position = -(pose.attitude * anchor_in_df);
    return pose;
}

/// Direct DTFT of a Hann-windowed frame channel at an arbitrary frequency.
inline std::complex<double> windowed_dtft(const std::vector<std::complex<double>>& samples,
                                          double freq_hz, double sample_rate) {
    const std::size_t n = samples.size();
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        double w = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) /
                                        static_cast<double>(n));
        double phase = -2.0 * kPi * freq_hz * static_cast<double>(i) / sample_rate;
        acc += samples[i] * w * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    return acc;
}

/// Sort-based nearest-rank percentile, kept independent of the library.
inline double brute_force_percentile(std::vector<double> v, double pct) {
    std::sort(v.begin(), v.end());
    auto idx = static_cast<std::size_t>(std::ceil(pct / 100.0 * static_cast<double>(v.size())));
    if (idx < 1) idx = 1;
    if (idx > v.size()) idx = v.size();
    return v[idx - 1];
}

} // namespace testsupport
