#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace aquaclear {

// Deterministic generator: std::mt19937_64 (bit-exact across standard
// libraries) with hand-written conversions, since the std distributions are
// implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // [0,1) with 53 bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    // Box-Muller; consumes two uniforms per call.
    double normal();

private:
    std::mt19937_64 engine_;
};

// Stable 64-bit mixing for seed derivation.
std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t fnv1a64(std::string_view text) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key, std::uint64_t index) noexcept;

}  // namespace aquaclear
