#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "mcprop/error.hpp"

namespace mcprop {

namespace detail {

// SplitMix64 finalizer; full-avalanche 64-bit mixer.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

} // namespace detail

// Counter-based deterministic generator. A stream is identified by a key
// derived from (seed, channel, channel, ...); draws are a pure function of
// (key, draw index), so results do not depend on which thread produced them
// or in what order streams are consumed.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed)
        : key_(detail::mix64(seed ^ 0x5851F42D4C957F2Dull)) {}

    // Derive an independent child stream for a sub-task (tuple index,
    // group id, pixel index, ...). Does not disturb this stream.
    CounterRng stream(std::uint64_t channel) const {
        CounterRng child(0);
        child.key_ = detail::mix64(key_ ^ detail::mix64(channel ^ 0xD6E8FEB86659FD93ull));
        child.counter_ = 0;
        return child;
    }

    std::uint64_t next_u64() {
        return detail::mix64(key_ + (++counter_) * 0x9E3779B97F4A7C15ull);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n), unbiased via rejection.
    std::uint64_t uniform_below(std::uint64_t n) {
        if (n == 0) throw DomainError("uniform_below: empty range");
        if (n == 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t bits;
        do {
            bits = next_u64();
        } while (bits >= limit);
        return bits % n;
    }

    // Uniform integer in [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        if (hi < lo) throw DomainError("uniform_int: empty range");
        const std::uint64_t span =
            static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
        return lo + static_cast<std::int64_t>(span == 0 ? next_u64()
                                                        : uniform_below(span));
    }

    // Standard normal via Box-Muller (consumes two uniforms per call).
    double normal(double mean = 0.0, double sigma = 1.0) {
        double u1;
        do {
            u1 = uniform_double();
        } while (u1 <= 0.0);
        const double u2 = uniform_double();
        const double z =
            std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
        return mean + sigma * z;
    }

    // Poisson draw. Knuth's product method, halving large means first so the
    // running product never underflows (sum of independent Poissons).
    std::int64_t poisson(double mean) {
        if (!(mean >= 0.0)) throw DomainError("poisson mean must be >= 0");
        if (mean == 0.0) return 0;
        std::int64_t total = 0;
        while (mean > 64.0) {
            const double half = mean / 2.0;
            total += poisson_small(half);
            mean -= half;
        }
        return total + poisson_small(mean);
    }

private:
    std::int64_t poisson_small(double mean) {
        const double limit = std::exp(-mean);
        std::int64_t k = 0;
        double product = 1.0;
        do {
            ++k;
            product *= uniform_double();
        } while (product > limit);
        return k - 1;
    }

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

} // namespace mcprop
