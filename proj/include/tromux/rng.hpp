#pragma once

#include <cstdint>
#include <random>

namespace tromux {

// Thin wrapper around mt19937_64. The engine's output sequence is pinned by the
// standard, and we do our own uniform mapping, so identical seeds give identical
// streams on every platform (std::uniform_int_distribution does not promise that).
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    /// Unbiased integer in [0, n). n must be > 0.
    uint64_t below(uint64_t n) {
        // rejection sampling on the top of the range
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = eng_();
        } while (v >= limit);
        return v % n;
    }

    bool coin() { return (eng_() >> 63) != 0; }

    double unit() { return double(eng_() >> 11) * 0x1.0p-53; }

    /// Derive an independent substream seed (splitmix64 finalizer over a, b).
    static uint64_t mix(uint64_t a, uint64_t b) {
        uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 eng_;
};

} // namespace tromux
