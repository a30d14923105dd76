#pragma once

#include <cstdint>
#include <string_view>

namespace aai {

/// SplitMix64 stream. All procedural randomness in the simulator is drawn
/// from these, never from <random> distributions, so draw sequences are
/// identical on every platform.
class Rng {
public:
    constexpr explicit Rng(std::uint64_t state = 0) : state_(state) {}

    constexpr std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi] inclusive (unbiased, rejection based).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    bool coin() { return (next() >> 63) != 0; }

    constexpr std::uint64_t state() const { return state_; }
    constexpr void set_state(std::uint64_t s) { state_ = s; }

    bool operator==(const Rng&) const = default;

private:
    std::uint64_t state_;
};

/// 64-bit FNV-1a.
constexpr std::uint64_t hash_label(std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Independent stream for one purpose ("layout", "colors", "scripts", ...).
constexpr Rng derive_rng(std::uint64_t seed, std::string_view purpose) {
    return Rng{seed ^ hash_label(purpose)};
}

}  // namespace aai
