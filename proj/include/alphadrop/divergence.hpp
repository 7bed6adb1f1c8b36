#pragma once

#include <cstddef>
#include <cstdint>

#include "alphadrop/rng.hpp"

namespace alphadrop {

// One Gaussian factor N(mean, variance).
struct GaussianParams {
    double mean = 0.0;
    double variance = 1.0;
};

// alpha-divergence configuration. alpha values within 1e-6 of 1 are remapped
// to 0.999 for the sampled/polynomial path: the 1/(alpha-1) prefactor is
// singular there and the exact KL limit is served by the closed-form branch.
// c_const is the arbitrary finite constant of the improper log-uniform prior;
// production uses 1, which removes the term.
struct AlphaSpec {
    double alpha;
    double c_const = 1.0;

    static AlphaSpec make(double alpha, double c_const = 1.0);
};

// Renyi divergence of order alpha between two Gaussians, closed form:
//   D_a(q1||q2) = log(s2/s1) + log(s2^2/s*^2)/(2(a-1)) + a (m1-m2)^2 / (2 s*^2)
// with s*^2 = a s2^2 + (1-a) s1^2. Returns +inf when s*^2 <= 0 (the
// integral diverges). alpha = 1 belongs to kl_gaussian_closed_form.
double renyi_gaussian_closed_form(const GaussianParams& q1, const GaussianParams& q2,
                                  double alpha);

// KL(q1||q2) for Gaussians; the alpha->1 limit of the Renyi form.
double kl_gaussian_closed_form(const GaussianParams& q1, const GaussianParams& q2);

// Divergence of the weight-sign factor: posterior (q0, 1-q0) on {-1,+1}
// against the uniform prior. Two-point Renyi form for |alpha-1| > 1e-6,
// two-point KL in the limit branch. q0 must lie strictly inside (0,1).
double sign_divergence(double q0, double alpha);

// P(eps < 0) for eps ~ N(1, a): the probability of a negative weight under
// Gaussian dropout with noise variance a. Equals Phi(-1/sqrt(a)).
double q0_for_gaussian_dropout(double a);

// log density of y = log|eps| for eps ~ N(1, a) (folded magnitude times the
// Jacobian e^y). This is the distribution whose alpha-power integral
//   T(alpha, a) = integral q_y(y)^alpha dy
// carries the magnitude part of the divergence against the log-uniform prior.
double log_magnitude_density(double y, double a);

// Location of the maximum of log_magnitude_density(., a), used to anchor
// proposals and quadrature.
double magnitude_density_mode(double a);

// A Monte-Carlo estimate with an iid-formula standard error (conservative
// for the stratified sampler) and the count of guarded resamples.
struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
    std::size_t n_resampled = 0;
};

// Monte-Carlo estimate of the negative alpha-divergence between the Gaussian
// dropout posterior (noise variance a) and the sign/log-uniform prior:
//
//   -D(a) = log 0.5 - log(q0^alpha + (1-q0)^alpha)/(alpha-1)   [sign factor]
//           + log c - log T(alpha, a)/(alpha-1)                [magnitude]
//
// T is estimated from n_samples seeded draws. Near alpha = 1 the sampler
// draws y = log|eps| directly (weights q_y^(alpha-1) concentrate around 1, so
// the 1/(alpha-1) amplification cancels); elsewhere it importance-samples
// from an analytic mixture anchored at the integrand mode, with stratified
// uniforms throughout. Deterministic given the stream's seed.
McEstimate neg_alpha_div_mc(double a, const AlphaSpec& spec, std::size_t n_samples,
                            RngStream& rng);

// The direct form of the estimator: averages q(eps)^(-alpha)/|eps| over plain
// N(1, a) draws and returns
//   log 0.5 - (alpha/(alpha-1)) log c - log mean / (alpha - 1).
// Heavy-tailed in both tails (its expectation does not converge), so it is a
// diagnostic, not the production path; the logged std_error is the honest
// caveat. Draws with |eps| < 1e-12 are resampled and counted. Accepts
// alpha = 0, where the value approaches log 0.5 as a -> 0.
McEstimate neg_alpha_div_mc_direct(double a, const AlphaSpec& spec,
                                   std::size_t n_samples, RngStream& rng);

// |d_joint - (d1 + d2)| <= tol: additivity of the divergence over
// independent factors.
bool additivity_check(double d1, double d2, double d_joint, double tol = 1e-9);

}  // namespace alphadrop
