#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace pw {

// Deterministic generator keyed by (seed, stream, index). The standard
// distributions are implementation-defined, so the draws below are written
// out to keep output identical across standard libraries.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t index = 0) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                          static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
        eng_.seed(seq);
    }

    std::uint64_t next() { return eng_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Uniform on {0, ..., n-1}, n > 0 (Lemire's multiply-and-reject).
    std::uint64_t below(std::uint64_t n) {
        unsigned __int128 m = static_cast<unsigned __int128>(eng_()) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            std::uint64_t t = (0 - n) % n;
            while (lo < t) {
                m = static_cast<unsigned __int128>(eng_()) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // True with probability p, resolved to 2^-64 so that tiny p are not lost.
    bool bernoulli(long double p) {
        if (p <= 0) return false;
        if (p >= 1) return true;
        long double u = static_cast<long double>(eng_()) * 0x1.0p-64L;
        return u < p;
    }

    double normal() {
        // Box-Muller, one value per call.
        double u1 = uniform(), u2 = uniform();
        if (u1 <= 0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace pw
