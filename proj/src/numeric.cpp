#include "alphadrop/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace alphadrop {

namespace {

// Cody (1969) rational coefficients for erf on |x| <= 0.46875 ...
const double A[5] = {3.16112374387056560e+0, 1.13864154151050156e+2,
                     3.77485237685302021e+2, 3.20937758913846947e+3,
                     1.85777706184603153e-1};
const double B[4] = {2.36012909523441209e+1, 2.44024637934444173e+2,
                     1.28261652607737228e+3, 2.84423683343917062e+3};
// ... erfc on 0.46875 < x <= 4 ...
const double C[9] = {5.64188496988670089e-1, 8.88314979438837594e+0,
                     6.61191906371416295e+1, 2.98635138197400131e+2,
                     8.81952221241769090e+2, 1.71204761263407058e+3,
                     2.05107837782607147e+3, 1.23033935479799725e+3,
                     2.15311535474403846e-8};
const double D[8] = {1.57449261107098347e+1, 1.17693950891312499e+2,
                     5.37181101862009858e+2, 1.62138957456669019e+3,
                     3.29079923573345963e+3, 4.36261909014324716e+3,
                     3.43936767414372164e+3, 1.23033935480374942e+3};
// ... and erfc on x > 4.
const double P[6] = {3.05326634961232344e-1, 3.60344899949804439e-1,
                     1.25781726111229246e-1, 1.60837851487422766e-2,
                     6.58749161529837803e-4, 1.63153871373020978e-2};
const double Q[5] = {2.56852019228982242e+0, 1.87295284992346047e+0,
                     5.27905102951428412e-1, 6.05183413124413191e-2,
                     2.33520497626869185e-3};

double erf_small(double x) {
    // |x| <= 0.46875
    const double z = x * x;
    double num = A[4] * z;
    double den = z;
    for (int i = 0; i < 3; ++i) {
        num = (num + A[i]) * z;
        den = (den + B[i]) * z;
    }
    return x * (num + A[3]) / (den + B[3]);
}

double erfc_mid(double x) {
    // 0.46875 < x <= 4
    double num = C[8] * x;
    double den = x;
    for (int i = 0; i < 7; ++i) {
        num = (num + C[i]) * x;
        den = (den + D[i]) * x;
    }
    const double r = (num + C[7]) / (den + D[7]);
    const double z = std::floor(x * 16.0) / 16.0;
    return std::exp(-z * z) * std::exp(-(x - z) * (x + z)) * r;
}

double erfc_large(double x) {
    // x > 4
    const double z = 1.0 / (x * x);
    double num = P[5] * z;
    double den = z;
    for (int i = 0; i < 4; ++i) {
        num = (num + P[i]) * z;
        den = (den + Q[i]) * z;
    }
    double r = z * (num + P[4]) / (den + Q[4]);
    r = (0.5641895835477562869 - r) / x;  // 1/sqrt(pi) leading term
    const double zz = std::floor(x * 16.0) / 16.0;
    return std::exp(-zz * zz) * std::exp(-(x - zz) * (x + zz)) * r;
}

}  // namespace

double erfc_cody(double x) {
    const double ax = std::fabs(x);
    double v;
    if (ax <= 0.46875) {
        return 1.0 - erf_small(x);
    } else if (ax <= 4.0) {
        v = erfc_mid(ax);
    } else if (ax < 26.6) {
        v = erfc_large(ax);
    } else {
        v = 0.0;
    }
    return x < 0.0 ? 2.0 - v : v;
}

double normal_cdf(double x) {
    if (std::isnan(x)) throw std::invalid_argument("normal_cdf: NaN input");
    // Phi(x) = erfc(-x / sqrt(2)) / 2
    return 0.5 * erfc_cody(-x * 0.7071067811865475244);
}

double logsumexp(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("logsumexp: empty input");
    const double mx = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(mx)) return mx;  // all -inf, or a +inf/NaN dominates
    double s = 0.0;
    for (double v : values) s += std::exp(v - mx);
    return mx + std::log(s);
}

}  // namespace alphadrop
