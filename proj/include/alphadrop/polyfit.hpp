#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <utility>

namespace alphadrop {

// Coefficients of a polynomial sum_k c[k] x^k, degree <= 3.
struct PolyCoeffs {
    std::size_t degree = 3;
    std::array<double, 4> c{};  // c[k] multiplies x^k

    double operator()(double x) const;

    bool operator==(const PolyCoeffs&) const = default;
};

// Least-squares polynomial fit via the (degree+1)x(degree+1) normal
// equations; fine at degree <= 3 on any sane grid. Requires at least
// degree+1 points with distinct x. Throws std::invalid_argument otherwise.
PolyCoeffs fit_least_squares_poly(std::span<const double> xs,
                                  std::span<const double> ys,
                                  std::size_t degree);

// Value and d/dx at x.
std::pair<double, double> poly_eval_and_grad(const PolyCoeffs& p, double x);

}  // namespace alphadrop
