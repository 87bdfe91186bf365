#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace asymcap {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Counter-based stream derivation: a stream is addressed by a path of ids
// hanging off a master seed, so enlarging an experiment never reseeds the
// streams of trials that already ran.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = master ^ 0xd1b54a32d192ed03ull;
    (void)splitmix64(h);
    for (std::uint64_t id : path) {
        h ^= id;
        (void)splitmix64(h);
    }
    std::uint64_t s = h;
    return splitmix64(s);
}

// xoshiro256++, seeded through splitmix64. Self-contained so that sampling
// is bit-reproducible regardless of the standard library in use.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        for (auto& w : state_) w = splitmix64(seed);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return next_double() < p; }

    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::array<std::uint64_t, 4> state_;
};

}  // namespace asymcap
