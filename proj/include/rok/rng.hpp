// Splittable seeded random source.
//
// The variate stream is fully determined by (seed, stream_id): the raw
// 64-bit stream is std::mt19937_64 (bit-exact by the standard) keyed by a
// SplitMix64 hash of the pair, uniforms take the top 53 bits, and normals
// use the Marsaglia polar transform with the second variate cached.
// Distinct stream ids give decorrelated streams, so per-draw substreams
// can be generated in any order (or in parallel) and merged.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rok {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace detail

class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed, std::uint64_t stream_id = 0)
        : seed_(seed),
          stream_id_(stream_id),
          engine_(detail::splitmix64(detail::splitmix64(seed) ^
                                     detail::splitmix64(~stream_id))) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    /// Independent substream; deterministic in (seed, stream_id, sub).
    SeededRng split(std::uint64_t sub) const {
        return SeededRng(detail::splitmix64(seed_ ^ detail::splitmix64(stream_id_)), sub);
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal (Marsaglia polar transform, spare cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double factor = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * factor;
        has_spare_ = true;
        return u * factor;
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace rok
