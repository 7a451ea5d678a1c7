#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

namespace anchorloc {

/// Counter-based deterministic RNG (splitmix64 output function). Draw i of
/// stream (seed, stream_id) depends only on those three integers, so frames
/// and trials can be generated independently and in any order.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix_key(seed, stream)) {}

    std::uint64_t next_u64() {
        return mix(key_ + 0x9E3779B97F4A7C15ULL * ++counter_);
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Two independent standard normals (Box-Muller).
    std::pair<double, double> gaussian_pair() {
        double u1 = 1.0 - uniform01(); // (0, 1]
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        return {r * std::cos(2.0 * 3.14159265358979323846 * u2),
                r * std::sin(2.0 * 3.14159265358979323846 * u2)};
    }

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    /// Derive a child seed; used to key per-frame and per-trial substreams.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
        return mix(mix(seed) ^ mix(a + 0x632BE59BD9B4E019ULL) ^ mix(b + 0x9E6C63D0876A9F77ULL));
    }

  private:
    static std::uint64_t mix_key(std::uint64_t seed, std::uint64_t stream) {
        return mix(seed ^ mix(stream + 0xD6E8FEB86659FD93ULL));
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace anchorloc
