#include "alphadrop/polyfit.hpp"

#include <cmath>
#include <stdexcept>

namespace alphadrop {

double PolyCoeffs::operator()(double x) const {
    double v = 0.0;
    for (std::size_t k = degree + 1; k-- > 0;) v = v * x + c[k];
    return v;
}

PolyCoeffs fit_least_squares_poly(std::span<const double> xs,
                                  std::span<const double> ys,
                                  std::size_t degree) {
    if (degree > 3) throw std::invalid_argument("fit_least_squares_poly: degree > 3");
    if (xs.size() != ys.size())
        throw std::invalid_argument("fit_least_squares_poly: xs/ys length mismatch");
    const std::size_t n = degree + 1;
    if (xs.size() < n)
        throw std::invalid_argument("fit_least_squares_poly: need at least degree+1 points");

    // Normal equations: (V^T V) c = V^T y for the Vandermonde V.
    double G[4][4] = {};
    double b[4] = {};
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double pows[7] = {1, 0, 0, 0, 0, 0, 0};
        for (std::size_t k = 1; k <= 2 * degree; ++k) pows[k] = pows[k - 1] * xs[i];
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t cc = 0; cc < n; ++cc) G[r][cc] += pows[r + cc];
            b[r] += pows[r] * ys[i];
        }
    }

    // Gaussian elimination with partial pivoting on the tiny system.
    int idx[4] = {0, 1, 2, 3};
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(G[idx[r]][col]) > std::fabs(G[idx[piv]][col])) piv = r;
        std::swap(idx[col], idx[piv]);
        const double d = G[idx[col]][col];
        if (std::fabs(d) < 1e-300)
            throw std::invalid_argument("fit_least_squares_poly: degenerate points");
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = G[idx[r]][col] / d;
            for (std::size_t cc = col; cc < n; ++cc) G[idx[r]][cc] -= f * G[idx[col]][cc];
            b[idx[r]] -= f * b[idx[col]];
        }
    }
    PolyCoeffs out;
    out.degree = degree;
    for (std::size_t r = n; r-- > 0;) {
        double s = b[idx[r]];
        for (std::size_t cc = r + 1; cc < n; ++cc) s -= G[idx[r]][cc] * out.c[cc];
        out.c[r] = s / G[idx[r]][r];
    }
    for (std::size_t k = 0; k < n; ++k)
        if (!std::isfinite(out.c[k]))
            throw std::invalid_argument("fit_least_squares_poly: non-finite solution");
    return out;
}

std::pair<double, double> poly_eval_and_grad(const PolyCoeffs& p, double x) {
    double v = 0.0, d = 0.0;
    for (std::size_t k = p.degree + 1; k-- > 0;) {
        d = d * x + v;
        v = v * x + p.c[k];
    }
    return {v, d};
}

}  // namespace alphadrop
