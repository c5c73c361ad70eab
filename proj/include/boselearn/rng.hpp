#pragma once

#include <cstdint>

namespace boselearn {

// Deterministic, platform-independent RNG. xoshiro256++ core seeded through
// splitmix64. Streams are derived counter-style from a base seed so that
// parallel trials and trajectories get reproducible, disjoint randomness
// regardless of scheduling order.
namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
}

}  // namespace detail

class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : base_(seed) {
        std::uint64_t x = seed;
        for (auto& si : s_) si = detail::splitmix64(x);
    }

    // Derived sub-stream: deterministic function of (base seed, salt) only.
    RngStream derive(std::uint64_t salt) const {
        std::uint64_t x = base_ ^ (0x632be59bd9b4e019ULL * (salt + 1));
        return RngStream(detail::splitmix64(x));
    }

    RngStream derive(std::uint64_t a, std::uint64_t b) const { return derive(a).derive(b); }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = detail::rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    std::uint64_t base_seed() const { return base_; }

private:
    std::uint64_t base_;
    std::uint64_t s_[4];
};

}  // namespace boselearn
