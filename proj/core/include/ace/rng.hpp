#pragma once

#include <array>
#include <cstdint>

namespace ace {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds (Salmon et al., Random123).
PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key);

// Maps 64 random bits to a double strictly inside (0, 1).
double bits_to_open_unit(std::uint64_t bits);

// Uniform in (0, 1) addressed by (seed, a, b, c, d). Used for the per-epoch,
// per-observation latent draws so that every draw is reproducible regardless
// of evaluation order.
double counter_uniform(std::uint64_t seed, std::uint32_t a, std::uint32_t b, std::uint32_t c,
                       std::uint32_t d);

// Sequential stream over a fixed (seed, stream) key. Platform independent,
// unlike the std:: distributions.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint32_t stream);

    double uniform();                        // (0, 1)
    double uniform(double lo, double hi);    // (lo, hi)
    double normal();                         // Box-Muller, standard normal

private:
    PhiloxKey key_;
    std::uint32_t stream_;
    std::uint64_t position_ = 0;
};

}  // namespace ace
