#pragma once

#include <cstdint>
#include <array>

namespace pfnn2::rng {

// splitmix64 finalizer; the fixed mix used everywhere seeds are derived.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Deterministic stream derivation: fold tags one by one.
constexpr std::uint64_t derive(std::uint64_t seed) { return splitmix64(seed); }

template <class... Tags>
constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t tag, Tags... rest) {
    return derive(splitmix64(seed ^ (0xD1B54A32D192ED03ull * (tag + 1))), rest...);
}

// xoshiro256++ keyed from a single 64-bit seed.
class Stream {
  public:
    explicit Stream(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& w : s_) {
            x += 0x9E3779B97F4A7C15ull;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
            w = z ^ (z >> 31);
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on [0,1), 53-bit resolution.
    double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * u01(); }

    // Uniform on (0,1]; used for time samples on (0,T].
    double u01_open_low() { return 1.0 - u01(); }

    std::uint64_t below(std::uint64_t n) { return next() % n; }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::array<std::uint64_t, 4> s_{};
};

}  // namespace pfnn2::rng
