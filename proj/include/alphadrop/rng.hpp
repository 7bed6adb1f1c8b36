#pragma once

#include <cstdint>
#include <cstddef>

#include "alphadrop/matrix.hpp"

namespace alphadrop {

// Seeded, platform-independent random stream: xoshiro256++ state initialized
// by splitmix64 from a 64-bit seed. Identical seed gives an identical sample
// sequence on any platform; no libc rand, no std::normal_distribution
// (its output is implementation-defined).
//
// Gaussian draws map one uniform to one normal through the inverse normal
// CDF (Wichura's PPND16), so stream position and sample count always agree.
//
// A stream must not be shared across concurrent callers. Concurrent tasks
// each derive their own stream with derive_seed(parent, task_index).
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64();

    // Uniform on [0, 1) with 53 random bits.
    double next_double();

    // Uniform on (0, 1): never returns an endpoint (safe to feed into
    // inverse CDFs and logs).
    double next_open();

    // Standard normal via inverse CDF.
    double next_normal();

    // loc + scale * N(0,1); scale = 0 gives the constant loc.
    // Throws std::invalid_argument if scale < 0.
    double next_normal(double loc, double scale);

private:
    std::uint64_t seed_;
    std::uint64_t s_[4];
};

// Deterministic child-seed derivation for concurrent tasks:
// splitmix64 mix of parent advanced by (index + 1).
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

// Matrix of i.i.d. loc + scale*N(0,1) draws, row-major draw order.
Matrix sample_gaussian(RngStream& rng, double loc, double scale,
                       std::size_t rows, std::size_t cols);

// Inverse standard normal CDF (quantile function), Wichura's algorithm
// AS 241 (PPND16), absolute error below 1e-15 over (0, 1).
double normal_quantile(double p);

}  // namespace alphadrop
