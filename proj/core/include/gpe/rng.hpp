#pragma once

#include <cstdint>

namespace gpe {

/// splitmix64: counter-based 64-bit generator (Steele, Lea & Flood 2014).
/// Reported as "splitmix64" in simulation metadata.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform on the open interval (0,1); never returns an endpoint.
    double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

    /// Standard normal via the inverse CDF (norm_quantile).
    double normal();

private:
    std::uint64_t state_;
};

/// Deterministic stream derivation: the same (base, index) pair yields the
/// same seed regardless of evaluation order or thread count.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace gpe
