#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "alphadrop/divergence.hpp"
#include "alphadrop/polyfit.hpp"

namespace alphadrop {

// Fitted cubic approximating -D_alpha as a function of the dropout rate a.
// The polynomial variable is t = ln a: the layer's trainable parameter is
// log a, the curve is close to linear in ln a near the KL limit, and a cubic
// in ln a fits the whole family well below the residual bound where a cubic
// in a itself does not.
struct PolyApprox {
    double alpha = 0.0;
    PolyCoeffs coeffs;  // in t = ln a
    double a_min = 0.0;
    double a_max = 0.0;
    std::uint64_t n_mc_samples = 0;
    std::uint64_t grid_size = 0;
    std::uint64_t seed = 0;
    double fit_rmse = 0.0;

    // -D_alpha at dropout rate a (a inside [a_min, a_max]; evaluation
    // outside extrapolates the cubic).
    double value_at(double a) const;

    // Value and derivative with respect to log a.
    std::pair<double, double> value_and_grad_log_a(double log_a) const;

    bool operator==(const PolyApprox&) const = default;
};

// Thrown when the fit residual exceeds the acceptance bound; carries the
// numbers a caller needs to diagnose the table.
class TableFitError : public std::runtime_error {
public:
    TableFitError(double alpha, double rmse, double bound, double range);
    double alpha, rmse, bound, range;
};

// Log-spaced grid of n points over [a_min, a_max].
std::vector<double> default_a_grid(double a_min = 0.01, double a_max = 1.0,
                                   std::size_t n = 100);

// Fit residual bound: 2% of the value range over the grid.
inline constexpr double kFitRmseRangeFraction = 0.02;

// Evaluates neg_alpha_div_mc on every grid point (one derived stream per
// point, so the table is deterministic in `seed` and independent of
// evaluation order) and fits the cubic in ln a. Throws TableFitError if the
// residual exceeds the bound.
PolyApprox build_poly_table(const AlphaSpec& spec, const std::vector<double>& a_grid,
                            std::size_t n_samples, std::uint64_t seed);

// Fit-only entry point (the production builder funnels through this; tests
// feed synthetic target values through it directly).
PolyApprox fit_poly_table(const AlphaSpec& spec, const std::vector<double>& a_grid,
                          const std::vector<double>& values, std::size_t n_samples,
                          std::uint64_t seed);

// Text serialization, version 1. Line one holds the header fields
// (format tag, alpha, a_min, a_max, n_mc_samples, grid_size, seed, fit_rmse),
// line two the four coefficients; all doubles are written in shortest
// round-trip form, so load(save(x)) == x bit for bit.
std::string poly_table_to_string(const PolyApprox& t);
PolyApprox poly_table_from_string(const std::string& text);

void save_poly_table(const std::string& path, const PolyApprox& t);
PolyApprox load_poly_table(const std::string& path);

}  // namespace alphadrop
