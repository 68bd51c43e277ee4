#pragma once

#include <cstdint>

namespace manetid {

// splitmix64. Small, fast, and fully specified by its own arithmetic, so
// seeded runs produce identical streams on every platform; the std::
// distributions make no such promise and would break byte-identical traces.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 1) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + next_double() * (hi - lo); }

    // Uniform integer in [0, n). Modulo bias is irrelevant at the n this
    // project draws (node ids, permutation indices).
    std::uint64_t next_below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

private:
    std::uint64_t state_;
};

// Independent per-entity stream (per node, per subsystem) from one scenario
// seed, golden-ratio mixed so stream 0 differs from the base stream.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return base ^ ((stream + 0x632BE59BD9B4E019ULL) * 0x9E3779B97F4A7C15ULL);
}

}  // namespace manetid
