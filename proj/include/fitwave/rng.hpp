#pragma once

// Seeded, splittable random number generation for reproducible ensembles.
//
// Replicate streams are derived from a 64-bit master seed with a fixed mix
// function, so an ensemble is a pure function of (config, master_seed) and
// replicates can run on any number of workers in any order.

#include <cmath>
#include <cstdint>

namespace fitwave::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// Finalizer of the splitmix64 generator (Steele, Lea, Flood 2014).  A
// bijection on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// splitmix64 step: advances the state and returns one output word.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += kGolden;
    return mix64(state);
}

// Stream seed for one replicate.  index |-> master + (index+1)*golden is
// injective and mix64 is a bijection, so distinct indices always yield
// distinct seeds for a fixed master seed.
inline std::uint64_t seed_for_replicate(std::uint64_t master_seed, std::uint64_t index) {
    return mix64(master_seed + (index + 1) * kGolden);
}

// xoshiro256++ (Blackman & Vigna 2019).  Small state, fast, and good
// enough statistically for Monte Carlo work at this scale.
class Xoshiro256 {
  public:
    explicit Xoshiro256(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = kGolden;
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

    // Uniform on the open interval (0,1): never returns 0 or 1, so
    // -log(u) is finite and strictly positive.
    double uniform01() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Exponential waiting time with the given rate.
    double exponential(double rate) {
        return -std::log(uniform01()) / rate;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
};

} // namespace fitwave::rng
