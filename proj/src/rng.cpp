#include "otnn/rng.hpp"

#include <cmath>

namespace otnn {

namespace {
constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ull;
constexpr double kPi = 3.141592653589793238462643383279502884;
}  // namespace

std::uint64_t Rng::next_u64() {
    state_ += kWeyl;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double Rng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // u1 in (0, 1] keeps the log finite.
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) return 0;
    // Rejection-free modulo is biased for huge n; our n are small, but keep
    // the standard multiply-shift reduction anyway.
    const std::uint64_t x = next_u64();
    return static_cast<std::uint64_t>((static_cast<__uint128_t>(x) * n) >> 64);
}

Rng Rng::split() { return Rng(next_u64()); }

}  // namespace otnn
