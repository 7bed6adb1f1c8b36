#include "alphadrop/poly_table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace alphadrop {

double PolyApprox::value_at(double a) const { return coeffs(std::log(a)); }

std::pair<double, double> PolyApprox::value_and_grad_log_a(double log_a) const {
    return poly_eval_and_grad(coeffs, log_a);
}

TableFitError::TableFitError(double alpha_, double rmse_, double bound_, double range_)
    : std::runtime_error("poly table fit rmse " + std::to_string(rmse_) +
                         " exceeds bound " + std::to_string(bound_) + " (alpha " +
                         std::to_string(alpha_) + ", value range " +
                         std::to_string(range_) + ")"),
      alpha(alpha_), rmse(rmse_), bound(bound_), range(range_) {}

std::vector<double> default_a_grid(double a_min, double a_max, std::size_t n) {
    if (!(a_min > 0.0) || !(a_max > a_min) || n < 2)
        throw std::invalid_argument("default_a_grid: need 0 < a_min < a_max, n >= 2");
    std::vector<double> g(n);
    const double l0 = std::log(a_min), l1 = std::log(a_max);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = std::exp(l0 + (l1 - l0) * i / (n - 1));
    g.front() = a_min;
    g.back() = a_max;
    return g;
}

PolyApprox fit_poly_table(const AlphaSpec& spec, const std::vector<double>& a_grid,
                          const std::vector<double>& values, std::size_t n_samples,
                          std::uint64_t seed) {
    if (a_grid.size() < 20)
        throw std::invalid_argument("fit_poly_table: need at least 20 grid points");
    if (a_grid.size() != values.size())
        throw std::invalid_argument("fit_poly_table: grid/value length mismatch");

    std::vector<double> ts(a_grid.size());
    std::transform(a_grid.begin(), a_grid.end(), ts.begin(),
                   [](double a) { return std::log(a); });
    const PolyCoeffs coeffs = fit_least_squares_poly(ts, values, 3);

    double sq = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double r = coeffs(ts[i]) - values[i];
        sq += r * r;
    }
    const double rmse = std::sqrt(sq / ts.size());
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double range = *hi - *lo;
    const double bound = kFitRmseRangeFraction * range;
    if (rmse > bound) throw TableFitError(spec.alpha, rmse, bound, range);

    PolyApprox t;
    t.alpha = spec.alpha;
    t.coeffs = coeffs;
    t.a_min = *std::min_element(a_grid.begin(), a_grid.end());
    t.a_max = *std::max_element(a_grid.begin(), a_grid.end());
    t.n_mc_samples = n_samples;
    t.grid_size = a_grid.size();
    t.seed = seed;
    t.fit_rmse = rmse;
    return t;
}

PolyApprox build_poly_table(const AlphaSpec& spec, const std::vector<double>& a_grid,
                            std::size_t n_samples, std::uint64_t seed) {
    std::vector<double> values(a_grid.size());
    for (std::size_t i = 0; i < a_grid.size(); ++i) {
        RngStream stream(derive_seed(seed, i));
        values[i] = neg_alpha_div_mc(a_grid[i], spec, n_samples, stream).value;
    }
    return fit_poly_table(spec, a_grid, values, n_samples, seed);
}

namespace {

constexpr const char* kFormatTag = "alphadrop-poly-v1";

std::string fmt(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

double parse_double(const std::string& tok) {
    double v{};
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw std::runtime_error("poly table: bad numeric field '" + tok + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& tok) {
    std::uint64_t v{};
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw std::runtime_error("poly table: bad integer field '" + tok + "'");
    return v;
}

}  // namespace

std::string poly_table_to_string(const PolyApprox& t) {
    std::ostringstream out;
    out << kFormatTag << ' ' << fmt(t.alpha) << ' ' << fmt(t.a_min) << ' '
        << fmt(t.a_max) << ' ' << t.n_mc_samples << ' ' << t.grid_size << ' '
        << t.seed << ' ' << fmt(t.fit_rmse) << '\n'
        << fmt(t.coeffs.c[0]) << ' ' << fmt(t.coeffs.c[1]) << ' '
        << fmt(t.coeffs.c[2]) << ' ' << fmt(t.coeffs.c[3]) << '\n';
    return out.str();
}

PolyApprox poly_table_from_string(const std::string& text) {
    std::istringstream in(text);
    std::string tag;
    in >> tag;
    if (tag != kFormatTag)
        throw std::runtime_error("poly table: unrecognized format tag '" + tag + "'");
    std::string f[7];
    for (auto& s : f)
        if (!(in >> s)) throw std::runtime_error("poly table: truncated header");
    PolyApprox t;
    t.alpha = parse_double(f[0]);
    t.a_min = parse_double(f[1]);
    t.a_max = parse_double(f[2]);
    t.n_mc_samples = parse_u64(f[3]);
    t.grid_size = parse_u64(f[4]);
    t.seed = parse_u64(f[5]);
    t.fit_rmse = parse_double(f[6]);
    t.coeffs.degree = 3;
    for (auto& ck : t.coeffs.c) {
        std::string s;
        if (!(in >> s)) throw std::runtime_error("poly table: truncated coefficients");
        ck = parse_double(s);
    }
    return t;
}

void save_poly_table(const std::string& path, const PolyApprox& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("poly table: cannot open for write: " + path);
    out << poly_table_to_string(t);
    if (!out) throw std::runtime_error("poly table: write failed: " + path);
}

PolyApprox load_poly_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("poly table: cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return poly_table_from_string(ss.str());
}

}  // namespace alphadrop
