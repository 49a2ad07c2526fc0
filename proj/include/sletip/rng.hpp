#pragma once

#include <cmath>
#include <cstdint>

namespace sletip {

// splitmix64 finalizer (avalanche mix of a 64-bit word).
inline std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// splitmix64 step; used only for seeding.
inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    return mix64(state += 0x9e3779b97f4a7c15ULL);
}

// xoshiro256++ with one independent stream per (seed, stream_id) pair.
// All sampling in the project goes through this type so that results are
// reproducible bit-for-bit for a given (seed, stream_id), independent of
// thread scheduling: each logical sample owns its own stream.
class Rng {
  public:
    Rng(std::uint64_t seed, std::uint64_t stream_id) noexcept {
        // The splitmix window that fills the state must start at a position
        // that is an avalanche hash of both seed and stream; offsetting the
        // counter by structured multiples would let the four-word windows of
        // nearby streams overlap, correlating their outputs.
        std::uint64_t x = mix64(seed + 0x9e3779b97f4a7c15ULL) ^
                          mix64(stream_id * 0xbf58476d1ce4e5b9ULL + 0x94d049bb133111ebULL);
        for (auto& w : state_) w = splitmix64(x);
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    std::uint64_t next_u64() noexcept {
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

    // Uniform in [0,1) with 53 random bits.
    double uniform01() noexcept { return double(next_u64() >> 11) * 0x1.0p-53; }

    // Standard normal via the polar method; the second variate is cached.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double a, b, s;
        do {
            a = 2.0 * uniform01() - 1.0;
            b = 2.0 * uniform01() - 1.0;
            s = a * a + b * b;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = b * m;
        has_spare_ = true;
        return a * m;
    }

  private:
    static std::uint64_t rotl(std::uint64_t v, int k) noexcept {
        return (v << k) | (v >> (64 - k));
    }

    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace sletip
