#pragma once

#include <span>

namespace alphadrop {

// Standard normal CDF, computed from a self-contained rational
// approximation of erfc (Cody 1969). Self-contained rather than libm so the
// value is bit-identical across platforms; absolute error below 1e-15.
// Handles far tails without cancellation (normal_cdf(-10) ~ 7.6e-24).
double normal_cdf(double x);

// Complementary error function, Cody's rational Chebyshev approximation.
double erfc_cody(double x);

// log(sum_i exp(v_i)), max-shifted. Throws std::invalid_argument on an
// empty input.
double logsumexp(std::span<const double> values);

}  // namespace alphadrop
