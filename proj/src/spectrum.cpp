#include "anchorloc/spectrum.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace anchorloc {

namespace {

// FFTW owns the planner globally; creation is serialized, execution runs on
// per-instance buffers.
std::mutex g_planner_mutex;

class FftPlan {
  public:
    explicit FftPlan(std::size_t n) : n_(n) {
        in_ = fftw_alloc_complex(n);
        out_ = fftw_alloc_complex(n);
        std::lock_guard<std::mutex> lock(g_planner_mutex);
        plan_ = fftw_plan_dft_1d(static_cast<int>(n), in_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;
    ~FftPlan() {
        std::lock_guard<std::mutex> lock(g_planner_mutex);
        fftw_destroy_plan(plan_);
        fftw_free(in_);
        fftw_free(out_);
    }

    void forward(const std::complex<double>* src, std::complex<double>* dst) {
        for (std::size_t i = 0; i < n_; ++i) {
            in_[i][0] = src[i].real();
            in_[i][1] = src[i].imag();
        }
        fftw_execute(plan_);
        for (std::size_t i = 0; i < n_; ++i) dst[i] = {out_[i][0], out_[i][1]};
    }

  private:
    std::size_t n_;
    fftw_complex* in_;
    fftw_complex* out_;
    fftw_plan plan_;
};

struct FftWorkspace {
    FftPlan plan;
    std::vector<double> window; // periodic Hann
    explicit FftWorkspace(std::size_t n) : plan(n), window(n) {
        for (std::size_t i = 0; i < n; ++i)
            window[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) /
                                             static_cast<double>(n));
    }
};

FftWorkspace& workspace_for(std::size_t n) {
    thread_local std::map<std::size_t, std::unique_ptr<FftWorkspace>> cache;
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, std::make_unique<FftWorkspace>(n)).first;
    return *it->second;
}

// Dirichlet-style kernel sum_{n=0}^{N-1} exp(i 2 pi delta n / N).
std::complex<double> dirichlet(double delta, double n) {
    double denom = std::sin(kPi * delta / n);
    if (std::abs(denom) < 1e-14) return {n, 0.0};
    double mag = std::sin(kPi * delta) / denom;
    double phase = kPi * delta * (n - 1.0) / n;
    return std::polar(mag, phase);
}

// DFT bin k of a periodic-Hann-windowed complex tone at bin position nu.
std::complex<double> hann_tone_bin(double nu, double k, double n) {
    double d = nu - k;
    return 0.5 * dirichlet(d, n) - 0.25 * dirichlet(d + 1.0, n) - 0.25 * dirichlet(d - 1.0, n);
}

// Log-power parabolic vertex offset in [-0.5, 0.5] around bin k.
double parabolic_offset(const std::vector<double>& power, int k) {
    double pm = power[k - 1], p0 = power[k], pp = power[k + 1];
    if (pm <= 0.0 || p0 <= 0.0 || pp <= 0.0) return 0.0;
    double ym = std::log(pm), y0 = std::log(p0), yp = std::log(pp);
    double denom = ym - 2.0 * y0 + yp;
    if (std::abs(denom) < 1e-30) return 0.0;
    double delta = 0.5 * (ym - yp) / denom;
    return std::clamp(delta, -0.5, 0.5);
}

// Least-squares fit of two windowed tones at bin positions nu_c +- nu_b to
// the band's complex bins; returns the captured (explained) energy.
struct TwoToneObjective {
    const ChannelSpectrum& spec;
    int k_lo;
    int k_hi;
    double n;

    double captured(double nu_c, double nu_b) const {
        std::complex<double> g11{}, g22{}, g12{}, r1{}, r2{};
        const double nu_u = nu_c + nu_b;
        const double nu_l = nu_c - nu_b;
        for (int k = k_lo; k <= k_hi; ++k) {
            std::complex<double> u = hann_tone_bin(nu_u, k, n);
            std::complex<double> l = hann_tone_bin(nu_l, k, n);
            const std::complex<double>& y = spec.bins[static_cast<std::size_t>(k)];
            g11 += std::conj(u) * u;
            g22 += std::conj(l) * l;
            g12 += std::conj(u) * l;
            r1 += std::conj(u) * y;
            r2 += std::conj(l) * y;
        }
        double a = g11.real() + 1e-12;
        double d = g22.real() + 1e-12;
        std::complex<double> b = g12;
        double det = a * d - std::norm(b);
        if (det <= 0.0) return 0.0;
        // c = G^-1 r; captured = Re(r^H c)
        std::complex<double> c1 = (d * r1 - b * r2) / det;
        std::complex<double> c2 = (a * r2 - std::conj(b) * r1) / det;
        return (std::conj(r1) * c1 + std::conj(r2) * c2).real();
    }
};

template <typename F>
double golden_max(F&& f, double lo, double hi, int iters) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

struct RefinedPair {
    double nu_lower = 0.0;
    double nu_upper = 0.0;
};

// Joint refinement for sideband pairs whose main lobes interact. Seeds from
// the coarse estimate, then alternates golden-section steps on the pair
// center and half-separation.
RefinedPair two_tone_refine(const TwoToneObjective& obj, double nu_c0, double nu_b0,
                            double max_half_sep) {
    double nu_c = nu_c0;
    double nu_b = std::max(nu_b0, 0.1);
    const double spans_b[3] = {1.0, 0.4, 0.15};
    const double spans_c[3] = {0.6, 0.25, 0.1};
    for (int round = 0; round < 3; ++round) {
        nu_b = golden_max(
            [&](double b) { return obj.captured(nu_c, b); },
            std::max(0.05, nu_b - spans_b[round]), std::min(max_half_sep, nu_b + spans_b[round]),
            22);
        nu_c = golden_max(
            [&](double c) { return obj.captured(c, nu_b); },
            nu_c - spans_c[round], nu_c + spans_c[round], 22);
    }
    return {nu_c - nu_b, nu_c + nu_b};
}

// Spectral overlap below this many bins triggers the joint fit; above it the
// parabolic estimates are already inside tolerance.
constexpr double kClosePairBins = 6.0;
constexpr double kLumpAcceptFraction = 0.5;

double band_energy(const ChannelSpectrum& spec, int k_lo, int k_hi) {
    double e = 0.0;
    for (int k = k_lo; k <= k_hi; ++k) e += spec.power[static_cast<std::size_t>(k)];
    return e;
}

struct BandPower {
    double signal = 0.0; // guard windows around both peaks (peak-width energy)
    double noise = 0.0;  // remaining in-band power

    double snr() const {
        if (noise <= 0.0)
            return signal > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        return signal / noise;
    }
};

BandPower band_power_split(const ChannelSpectrum& spec, int k_lo, int k_hi, int peak_a,
                           int peak_b, int guard) {
    BandPower bp;
    for (int k = k_lo; k <= k_hi; ++k) {
        bool in_guard = std::abs(k - peak_a) <= guard || std::abs(k - peak_b) <= guard;
        (in_guard ? bp.signal : bp.noise) += spec.power[static_cast<std::size_t>(k)];
    }
    return bp;
}

} // namespace

Spectrum compute_spectrum(const BasebandFrame& frame, double sample_rate) {
    const std::size_t n = frame.rx[0].size();
    if (n == 0 || frame.rx[1].size() != n)
        throw std::invalid_argument("compute_spectrum: frame must carry two equal-length channels");
    FftWorkspace& ws = workspace_for(n);

    Spectrum spec;
    spec.sample_rate = sample_rate;
    std::vector<std::complex<double>> windowed(n);
    for (int ch = 0; ch < 2; ++ch) {
        for (std::size_t i = 0; i < n; ++i) windowed[i] = frame.rx[ch][i] * ws.window[i];
        ChannelSpectrum& out = spec.ch[ch];
        out.bins.resize(n);
        ws.plan.forward(windowed.data(), out.bins.data());
        out.bins[0] = {0.0, 0.0}; // DC removed
        out.power.resize(n);
        out.bin_hz.resize(n);
        const double binw = sample_rate / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            out.power[i] = std::norm(out.bins[i]);
            out.bin_hz[i] = binw * static_cast<double>(i);
        }
    }
    return spec;
}

SearchBand SearchBand::centered(double f_mod, double half_width_hz) {
    SearchBand b;
    b.f_lo = f_mod - half_width_hz;
    b.f_hi = f_mod + half_width_hz;
    return b;
}

double range_from_beat(double f_beat, double chirp_slope) {
    if (f_beat < 0.0) throw std::domain_error("range_from_beat: negative beat frequency");
    if (chirp_slope <= 0.0) throw std::domain_error("range_from_beat: chirp slope must be > 0");
    return kSpeedOfLight * f_beat / (2.0 * chirp_slope);
}

PeakSearch find_peak_pair(const ChannelSpectrum& spec, const SearchBand& band,
                          double f_mod_nominal) {
    if (!(band.f_lo < band.f_hi)) throw std::invalid_argument("find_peak_pair: f_lo must be < f_hi");
    if (band.guard_bins < 1) throw std::invalid_argument("find_peak_pair: guard_bins must be >= 1");
    const double binw = spec.bin_width();
    if (binw <= 0.0) throw std::invalid_argument("find_peak_pair: empty spectrum");

    const int n = static_cast<int>(spec.power.size());
    int k_lo = static_cast<int>(std::ceil(band.f_lo / binw));
    int k_hi = static_cast<int>(std::floor(band.f_hi / binw));
    k_lo = std::max(k_lo, 1);
    k_hi = std::min(k_hi, n - 2);
    if (k_hi - k_lo < 4) throw std::invalid_argument("find_peak_pair: band too narrow for spectrum");

    PeakSearch result;

    // Local maxima inside the band, strongest first.
    std::vector<int> maxima;
    for (int k = k_lo + 1; k < k_hi; ++k) {
        double p = spec.power[static_cast<std::size_t>(k)];
        if (p > spec.power[static_cast<std::size_t>(k - 1)] &&
            p >= spec.power[static_cast<std::size_t>(k + 1)] && p > 0.0)
            maxima.push_back(k);
    }
    std::sort(maxima.begin(), maxima.end(), [&](int a, int b) {
        return spec.power[static_cast<std::size_t>(a)] > spec.power[static_cast<std::size_t>(b)];
    });
    if (maxima.size() > 8) maxima.resize(8);

    const double sym_tol_hz = band.symmetry_tol_bins * binw;
    const double nominal_bin = f_mod_nominal / binw;
    const double max_half_sep = 0.5 * static_cast<double>(k_hi - k_lo);

    // Best pair by combined power, preferring pairs whose midpoint stays
    // near the nominal modulation frequency.
    int best_a = -1, best_b = -1;
    double best_power = -1.0;
    bool best_symmetric = false;
    for (std::size_t i = 0; i < maxima.size(); ++i) {
        for (std::size_t j = i + 1; j < maxima.size(); ++j) {
            int a = std::min(maxima[i], maxima[j]);
            int b = std::max(maxima[i], maxima[j]);
            double mid_hz = 0.5 * (spec.bin_hz[static_cast<std::size_t>(a)] +
                                   spec.bin_hz[static_cast<std::size_t>(b)]);
            bool symmetric = std::abs(mid_hz - f_mod_nominal) <= sym_tol_hz;
            double p = spec.power[static_cast<std::size_t>(a)] +
                       spec.power[static_cast<std::size_t>(b)];
            if ((symmetric && !best_symmetric) ||
                (symmetric == best_symmetric && p > best_power)) {
                best_a = a;
                best_b = b;
                best_power = p;
                best_symmetric = symmetric;
            }
        }
    }

    double nu_lower = 0.0, nu_upper = 0.0;
    bool have_pair = false;
    bool symmetry_violated = false;

    if (best_a >= 0 && best_symmetric) {
        nu_lower = best_a + parabolic_offset(spec.power, best_a);
        nu_upper = best_b + parabolic_offset(spec.power, best_b);
        if (nu_upper - nu_lower < kClosePairBins) {
            TwoToneObjective obj{spec, k_lo, k_hi, static_cast<double>(n)};
            RefinedPair rp = two_tone_refine(obj, 0.5 * (nu_lower + nu_upper),
                                             0.5 * (nu_upper - nu_lower), max_half_sep);
            nu_lower = rp.nu_lower;
            nu_upper = rp.nu_upper;
        }
        have_pair = nu_upper - nu_lower > 0.05;
    } else if (!maxima.empty() &&
               std::abs(static_cast<double>(maxima[0]) - nominal_bin) <=
                   band.symmetry_tol_bins + 1.0) {
        // Single lump near the nominal frequency: the sidebands may have
        // merged. Fit a joint pair, scanning half-separation seeds.
        TwoToneObjective obj{spec, k_lo, k_hi, static_cast<double>(n)};
        double nu_c0 = maxima[0] + parabolic_offset(spec.power, maxima[0]);
        double best_captured = -1.0;
        double best_seed = 0.5;
        for (double seed : {0.3, 0.6, 0.9, 1.3, 1.8, 2.4}) {
            double c = obj.captured(nu_c0, seed);
            if (c > best_captured) {
                best_captured = c;
                best_seed = seed;
            }
        }
        RefinedPair rp = two_tone_refine(obj, nu_c0, best_seed, max_half_sep);
        double captured = obj.captured(0.5 * (rp.nu_lower + rp.nu_upper),
                                       0.5 * (rp.nu_upper - rp.nu_lower));
        double energy = band_energy(spec, k_lo, k_hi);
        if (energy > 0.0 && captured >= kLumpAcceptFraction * energy &&
            rp.nu_upper - rp.nu_lower > 0.1) {
            nu_lower = rp.nu_lower;
            nu_upper = rp.nu_upper;
            have_pair = true;
        }
    } else if (best_a >= 0) {
        // Two usable peaks exist but no pairing satisfies the symmetry
        // tolerance; classify after the SNR gate below.
        nu_lower = best_a + parabolic_offset(spec.power, best_a);
        nu_upper = best_b + parabolic_offset(spec.power, best_b);
        have_pair = nu_upper - nu_lower > 0.05;
        symmetry_violated = true;
    }

    if (!have_pair) {
        result.status = PeakSearch::Status::no_detection;
        return result;
    }

    PeakPair pair;
    pair.f_lower = nu_lower * binw;
    pair.f_upper = nu_upper * binw;
    pair.f_anchor_est = 0.5 * (pair.f_lower + pair.f_upper);
    pair.f_beat = 0.5 * (pair.f_upper - pair.f_lower);

    int peak_lo = std::clamp(static_cast<int>(std::lround(nu_lower)), k_lo, k_hi);
    int peak_up = std::clamp(static_cast<int>(std::lround(nu_upper)), k_lo, k_hi);
    BandPower bp = band_power_split(spec, k_lo, k_hi, peak_lo, peak_up, band.guard_bins);
    pair.peak_power = bp.signal;
    pair.snr = bp.snr();
    pair.upper_bin = peak_up;
    pair.upper_bin_value = spec.bins[static_cast<std::size_t>(peak_up)];

    if (pair.snr < band.snr_threshold) {
        result.status = PeakSearch::Status::no_detection;
        return result;
    }
    if (symmetry_violated || std::abs(pair.f_anchor_est - f_mod_nominal) > sym_tol_hz) {
        result.status = PeakSearch::Status::ambiguous;
        result.pair = pair;
        return result;
    }
    result.status = PeakSearch::Status::found;
    result.pair = pair;
    return result;
}

std::array<std::array<PeakSearch, 2>, 2>
separate_dual_frequency(const Spectrum& spec, const std::array<SearchBand, 2>& bands,
                        const std::array<double, 2>& f_mod_nominal) {
    if (std::max(bands[0].f_lo, bands[1].f_lo) <= std::min(bands[0].f_hi, bands[1].f_hi))
        throw std::invalid_argument("separate_dual_frequency: search bands overlap");
    std::array<std::array<PeakSearch, 2>, 2> out;
    for (int ch = 0; ch < 2; ++ch)
        for (int b = 0; b < 2; ++b)
            out[ch][b] = find_peak_pair(spec.ch[ch], bands[b], f_mod_nominal[b]);
    return out;
}

} // namespace anchorloc
