#include "gpe/rng.hpp"

#include "gpe/normal.hpp"

namespace gpe {

double SplitMix64::normal() {
    return norm_quantile(uniform());
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    SplitMix64 mixer(base ^ (0x9E3779B97F4A7C15ull * (index + 1)));
    mixer.next();
    return mixer.next();
}

}  // namespace gpe
