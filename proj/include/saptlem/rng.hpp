#pragma once

#include <cstdint>
#include <random>

namespace saptlem {

/** SplitMix64 step; advances `state` and returns the next output. */
std::uint64_t splitmix64(std::uint64_t& state);

/**
 * Seed for stream `index` derived from `master`. Streams with distinct
 * indices are statistically independent, so replicas, the manager's swap
 * draws, and training each get their own stream from one master seed.
 */
std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index);

/**
 * Deterministic random stream with a fixed draw cost per call: uniform()
 * consumes one engine output, normal() exactly two. Keeping consumption
 * independent of outcomes lets runs that take different branches (e.g.
 * surrogate vs true evaluation) stay aligned on the same draw sequence.
 */
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    /** Uniform double in [0, 1). */
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /** Uniform double in [lo, hi). */
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    /** Standard normal via Box-Muller; no cached spare, two engine outputs. */
    double normal();

    /** Uniform integer in [0, n); n must be positive. */
    std::uint64_t below(std::uint64_t n);

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

} // namespace saptlem
