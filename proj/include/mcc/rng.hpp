#pragma once

#include <cstdint>
#include <vector>

namespace mcc {

// Deterministic counter-based generator (splitmix64 core). All stochastic
// draws in the project go through this class so runs are bit-reproducible
// across platforms; std:: distributions are implementation-defined and are
// deliberately not used.
//
// split(tag) derives an independent child stream from the generator's
// identity seed, not its current state, so the set of streams a run uses
// does not depend on the order they are consumed in.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

    std::uint64_t next_u64();

    // Uniform on [0, 1), 53-bit resolution.
    double uniform();
    double uniform(double lo, double hi);

    // Standard normal via Box-Muller (two uniform draws per value).
    double normal();
    double normal(double mean, double stddev);

    // Uniform on [0, n), rejection-sampled (no modulo bias).
    std::size_t uniform_index(std::size_t n);

    // Deterministic Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    Rng split(std::uint64_t tag) const;

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t state_;
};

}  // namespace mcc
