#pragma once

#include <cstdint>

namespace otnn {

// Counter-based generator: a 64-bit Weyl sequence (state += golden-ratio
// increment) whose outputs are the state pushed through the splitmix64
// finalizer. state_k = seed + k*0x9E3779B97F4A7C15, output = mix(state_k).
// Identical seed gives an identical stream on every platform; a stream is
// fully described by (seed, draw count).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();

    // Uniform in [0, 1): 53 significand bits.
    double uniform01();
    double uniform(double lo, double hi);

    // Standard normal via Box-Muller; second value is cached, so draws come
    // in deterministic pairs.
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    // Independent stream derived from this one (consumes one draw).
    Rng split();

    std::uint64_t seed_state() const { return state_; }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace otnn
