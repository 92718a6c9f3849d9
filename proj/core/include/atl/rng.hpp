#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace atl {

/// Deterministic, platform-independent random stream.
///
/// The generator is xoshiro256++ seeded through splitmix64, so the draw
/// sequence for a given seed is identical on every platform: only integer
/// arithmetic and IEEE-754 multiplication by 2^-53 are involved.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64();

    /// Uniform in [0, 1) with 53 random bits.
    double next_unit();

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);

    /// True with probability p.
    bool bernoulli(double p);

    /// Uniform integer in [0, n), n > 0. Uses rejection sampling, unbiased.
    std::uint64_t next_below(std::uint64_t n);

    /// Child stream whose sequence depends only on (seed, salt), not on how
    /// far this stream has advanced. Used to give farms and runs independent
    /// streams whose output is invariant to scheduling order.
    RngStream derive(std::uint64_t salt) const;

private:
    std::uint64_t seed_;
    std::array<std::uint64_t, 4> state_;
};

/// In-place Fisher-Yates shuffle driven by the stream.
void shuffle_indices(std::vector<std::size_t>& indices, RngStream& rng);

/// Identity permutation [0, n).
std::vector<std::size_t> iota_indices(std::size_t n);

}  // namespace atl
