#include "mcc/rng.hpp"

#include <cmath>

namespace mcc {

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t Rng::next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix64(state_);
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + uniform() * (hi - lo);
}

double Rng::normal() {
    // u1 in (0,1] keeps the log finite.
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(6.28318530717958647692 * u2);
}

double Rng::normal(double mean, double stddev) {
    return mean + stddev * normal();
}

std::size_t Rng::uniform_index(std::size_t n) {
    if (n <= 1) return 0;
    std::uint64_t nn = static_cast<std::uint64_t>(n);
    std::uint64_t threshold = (0 - nn) % nn;  // 2^64 mod n
    for (;;) {
        std::uint64_t x = next_u64();
        if (x >= threshold) return static_cast<std::size_t>(x % nn);
    }
}

Rng Rng::split(std::uint64_t tag) const {
    return Rng(mix64(seed_ ^ (0x9E3779B97F4A7C15ull * (tag + 0x632BE59BD9B4E019ull))));
}

}  // namespace mcc
