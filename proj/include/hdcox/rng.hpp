#pragma once

#include <cstdint>

#include "hdcox/normal.hpp"

namespace hdcox {

/// Counter-based generator: each output is a hash of (key, counter), so a
/// stream keyed by (master seed, setting id, replication index) produces the
/// same values regardless of how work is scheduled across threads.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Derives a stream key from up to three components.
    static std::uint64_t stream_key(std::uint64_t master, std::uint64_t a = 0,
                                    std::uint64_t b = 0) {
        std::uint64_t k = mix(master);
        k = mix(k ^ mix(a + 0x632be59bd9b4e019ull));
        k = mix(k ^ mix(b + 0x9e6c63d0876a9a47ull));
        return k;
    }

    std::uint64_t next_u64() { return mix(key_ + (++counter_) * 0x9e3779b97f4a7c15ull); }

    /// Uniform draw strictly inside (0,1).
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via the inverse distribution function, keeping the
    /// stream consumption one draw per variate.
    double next_normal() { return normal_quantile(next_uniform()); }

    /// Uniform integer in [0, bound) by rejection-free scaling (bound small
    /// relative to 2^64, bias negligible for fold assignment use).
    std::uint64_t next_below(std::uint64_t bound) { return next_u64() % bound; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace hdcox
