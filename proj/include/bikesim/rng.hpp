#pragma once

#include <cstdint>
#include <random>

namespace bikesim {

// Seeded random stream with a platform-independent uniform mapping.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    // Uniform in [0, 1) with 53 random bits.
    double uniform()
    {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi)
    {
        if (lo == hi) {
            // consumes one draw like the general case
            engine_();
            return lo;
        }
        return lo + (hi - lo) * uniform();
    }

    bool coin() { return (engine_() >> 63) != 0; }

    std::uint64_t next_u64() { return engine_(); }

    // Independent child stream, e.g. for validation rides.
    Rng fork() { return Rng(next_u64() ^ 0x9E3779B97F4A7C15ULL); }

private:
    std::mt19937_64 engine_;
};

} // namespace bikesim
