#pragma once

#include <array>
#include <complex>
#include <vector>

#include "anchorloc/channel.hpp"

namespace anchorloc {

/// Windowed FFT of one RX channel. DC bin is zeroed; frequencies run
/// 0..(N-1)*fs/N so the axis is strictly increasing.
struct ChannelSpectrum {
    std::vector<double> bin_hz;
    std::vector<double> power; // magnitude squared per bin
    std::vector<std::complex<double>> bins;

    double bin_width() const { return bin_hz.size() > 1 ? bin_hz[1] - bin_hz[0] : 0.0; }
};

struct Spectrum {
    double sample_rate = 0.0;
    std::array<ChannelSpectrum, 2> ch;
};

/// Hann-windowed FFT of both RX channels.
Spectrum compute_spectrum(const BasebandFrame& frame, double sample_rate);

/// Frequency band searched for one antenna set's sideband pair.
struct SearchBand {
    double f_lo = 0.0;            // Hz
    double f_hi = 0.0;            // Hz
    int guard_bins = 3;           // gap removed around each peak in the SNR sum
    double snr_threshold = 4.0;   // detections below this are discarded
    double symmetry_tol_bins = 2.0; // allowed drift of the pair midpoint from nominal

    static SearchBand centered(double f_mod, double half_width_hz);
};

/// The two modulation sidebands of one antenna set, refined to sub-bin
/// precision. The midpoint estimates the anchor's modulation frequency and
/// the half-separation is the geometric beat.
struct PeakPair {
    double f_lower = 0.0;     // Hz
    double f_upper = 0.0;     // Hz
    double f_anchor_est = 0.0; // (f_lower + f_upper) / 2
    double f_beat = 0.0;       // (f_upper - f_lower) / 2
    double peak_power = 0.0;   // signal power: guard-window energy around both peaks
    double snr = 0.0;          // peak_power over the residual in-band power
    int upper_bin = 0;
    std::complex<double> upper_bin_value; // complex FFT value at upper_bin
};

struct PeakSearch {
    enum class Status { found, no_detection, ambiguous };
    Status status = Status::no_detection;
    PeakPair pair; // valid only when status == found

    bool found() const { return status == Status::found; }
};

/// Locate the sideband pair inside `band`. Peaks are refined by 3-point
/// parabolic interpolation on log power; pairs closer than a few bins fall
/// back to a joint two-tone least-squares fit, which stays accurate when the
/// sideband main lobes overlap.
PeakSearch find_peak_pair(const ChannelSpectrum& spec, const SearchBand& band,
                          double f_mod_nominal);

/// r = c * f_beat / (2k).
double range_from_beat(double f_beat, double chirp_slope);

/// Run find_peak_pair independently on both disjoint bands for both RX
/// channels. result[channel][band]. Throws std::invalid_argument when the
/// bands overlap.
std::array<std::array<PeakSearch, 2>, 2>
separate_dual_frequency(const Spectrum& spec, const std::array<SearchBand, 2>& bands,
                        const std::array<double, 2>& f_mod_nominal);

} // namespace anchorloc
