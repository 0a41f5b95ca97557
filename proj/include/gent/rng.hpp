#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

// Counter-based random number generator. Every random quantity in the
// library flows from a single 64-bit seed through this generator, so results
// are bit-reproducible across platforms (no wall-clock entropy, no
// implementation-defined std::normal_distribution).

namespace gent {

class CounterRng {
public:
    // The stream index is passed through the finalizer before it touches the
    // seed, so distinct streams cannot alias shifted counter sequences.
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(stream == 0 ? seed : seed ^ mix(stream)) {}

    // SplitMix64 finalizer applied to seed + counter.
    std::uint64_t next_u64() { return mix(seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }

    // Uniform in (0, 1]: never returns 0 so it is safe under log().
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller (deterministic across platforms).
    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        cached_ = r * std::sin(theta);
        have_cached_ = true;
        return r * std::cos(theta);
    }

    // Complex standard normal (real and imaginary parts N(0, 1)).
    std::complex<double> cgaussian() {
        const double re = gaussian();
        const double im = gaussian();
        return {re, im};
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace gent
