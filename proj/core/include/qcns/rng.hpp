#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace qcns {

// Deterministic random stream. The distribution mappings are implemented
// here rather than taken from <random> because the standard only specifies
// the engine sequence, not the distributions; regeneration must be
// bit-identical for a given seed.
class Rng {
  public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

    bool bernoulli(double p) { return uniform() < p; }

    // Standard normal via Box-Muller; the sine partner is cached so draws
    // come in deterministic pairs.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 0x1.0p-60) u1 = 0x1.0p-60;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

    // Exponential waiting time for a process with the given rate (1/s).
    double exponential(double rate) {
        double u = uniform();
        if (u <= 0.0) u = 0x1.0p-60;
        return -std::log1p(-u) / rate;
    }

    // Index in [0, bound) without modulo bias (rejection).
    uint64_t index(uint64_t bound) {
        const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % bound;
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// 64-bit FNV-1a, used to derive substream seeds from string labels.
constexpr uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 14695981039346656037ull;
    for (char c : s) {
        h ^= static_cast<uint8_t>(c);
        h *= 1099511628211ull;
    }
    return h;
}

constexpr uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Fixed-assignment substream: the same (seed, label) pair always yields the
// same stream, so adding a generator never perturbs the others.
inline uint64_t substream_seed(uint64_t master_seed, std::string_view label) {
    return splitmix64(master_seed ^ fnv1a64(label));
}

inline Rng substream(uint64_t master_seed, std::string_view label) {
    return Rng(substream_seed(master_seed, label));
}

}  // namespace qcns
