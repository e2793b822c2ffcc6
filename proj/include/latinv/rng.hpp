#pragma once

#include <cstdint>
#include <limits>
#include <span>

namespace latinv::rng {

inline constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// splitmix64 output function: a fixed 64-bit permutation with good
// avalanche. Used both as a stream step and as the building block of the
// keyed per-point generator.
constexpr uint64_t mix64(uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

// Derives an independent subkey from a key and a tag. Tags are arbitrary
// fixed 64-bit constants, one per purpose (see tags below).
constexpr uint64_t derive(uint64_t key, uint64_t tag) {
    return mix64(key + kGolden * (tag | 1ull)) ^ mix64(tag + kGolden);
}

// Stateless per-point uniform: the value depends only on (key, coords),
// never on the enclosing box or on iteration order. This is what makes
// samples tile-invariant and box-extension consistent.
inline uint64_t point_uniform(uint64_t key, std::span<const int64_t> coords) {
    uint64_t h = mix64(key + kGolden * (uint64_t(coords.size()) + 2));
    for (int64_t c : coords) {
        h = mix64(h ^ (uint64_t(c) + kGolden));
    }
    return mix64(h ^ key);
}

// Sequential splitmix64 stream for structured draws (polynomial
// coefficients, translates, continuous samplers). Satisfies
// UniformRandomBitGenerator so it can feed <random> distributions.
class Stream {
public:
    using result_type = uint64_t;

    explicit Stream(uint64_t key) : state_(key) {}

    uint64_t next() {
        state_ += kGolden;
        return mix64(state_);
    }

    // Unbiased integer in [0, n) by rejection.
    uint64_t next_below(uint64_t n) {
        if (n <= 1) return 0;
        const uint64_t limit = std::numeric_limits<uint64_t>::max() - std::numeric_limits<uint64_t>::max() % n;
        uint64_t u;
        do {
            u = next();
        } while (u >= limit);
        return u % n;
    }

    // Uniform in [0,1) with 53 random bits.
    double next_unit() { return double(next() >> 11) * 0x1.0p-53; }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<uint64_t>::max(); }
    result_type operator()() { return next(); }

private:
    uint64_t state_;
};

// Stream tags. These values are part of the stable sampling format:
// changing them changes every sample.
namespace tag {
inline constexpr uint64_t kRoot = 0x726F6F74ull;       // process tree root
inline constexpr uint64_t kLeft = 0x6C656674ull;       // left child of a combinator
inline constexpr uint64_t kRight = 0x72696768ull;      // right child
inline constexpr uint64_t kInner = 0x696E6E72ull;      // thin/image inner node
inline constexpr uint64_t kBernoulli = 0x6265726Eull;  // per-point keep draw
inline constexpr uint64_t kCoeffs = 0x636F6566ull;     // polynomial coefficient stream
inline constexpr uint64_t kThin = 0x7468696Eull;       // window thinning uniforms
inline constexpr uint64_t kThinQ = 0x7175616Cull;      // combinator thinning uniforms
inline constexpr uint64_t kPeriodic = 0x70657264ull;   // periodic translate stream
inline constexpr uint64_t kCutProject = 0x63757470ull; // cut-and-project translate stream
inline constexpr uint64_t kTrial = 0x7472696Cull;      // per-trial seed derivation
inline constexpr uint64_t kApShape = 0x61707368ull;    // AP (base, step) draws
inline constexpr uint64_t kCoupleStep = 0x63703273ull; // second-stage coupling uniforms
} // namespace tag

// Per-trial seed for independent Monte-Carlo repetitions.
constexpr uint64_t trial_seed(uint64_t seed, uint64_t trial) {
    return derive(derive(seed, tag::kTrial), trial + 1);
}

} // namespace latinv::rng
