#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "alphadrop/matrix.hpp"
#include "alphadrop/numeric.hpp"
#include "alphadrop/polyfit.hpp"
#include "alphadrop/rng.hpp"
#include "support/oracles.hpp"

using namespace alphadrop;

namespace {

Matrix random_matrix(RngStream& rng, std::size_t r, std::size_t c, double lo = -1.0,
                     double hi = 1.0) {
    Matrix m(r, c);
    for (std::size_t i = 0; i < m.size(); ++i)
        m.data()[i] = lo + (hi - lo) * rng.next_double();
    return m;
}

}  // namespace

TEST_CASE("matmul identity and hand cases") {
    RngStream rng(7);
    const Matrix m = random_matrix(rng, 3, 3);
    CHECK(matmul(Matrix::identity(3), m) == m);

    const Matrix a{{1, 2}, {3, 4}};
    const Matrix b{{0}, {1}};
    const Matrix p = matmul(a, b);
    CHECK(p(0, 0) == doctest::Approx(2));
    CHECK(p(1, 0) == doctest::Approx(4));

    CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), std::invalid_argument);
}

TEST_CASE("matmul matches the naive triple loop") {
    RngStream rng(11);
    const Matrix a = random_matrix(rng, 8, 8);
    const Matrix b = random_matrix(rng, 8, 8);
    const Matrix fast = matmul(a, b);
    const Matrix ref = oracles::naive_matmul(a, b);
    for (std::size_t i = 0; i < fast.size(); ++i)
        CHECK(fast.data()[i] == doctest::Approx(ref.data()[i]).epsilon(1e-12));
}

TEST_CASE("matmul transposed variants agree with explicit transpose") {
    RngStream rng(12);
    const Matrix a = random_matrix(rng, 5, 7);
    const Matrix b = random_matrix(rng, 5, 4);
    const Matrix c = random_matrix(rng, 6, 7);
    const Matrix tn = matmul_tn(a, b);
    const Matrix tn_ref = matmul(transpose(a), b);
    for (std::size_t i = 0; i < tn.size(); ++i)
        CHECK(tn.data()[i] == doctest::Approx(tn_ref.data()[i]).epsilon(1e-13));
    const Matrix nt = matmul_nt(a, c);
    const Matrix nt_ref = matmul(a, transpose(c));
    for (std::size_t i = 0; i < nt.size(); ++i)
        CHECK(nt.data()[i] == doctest::Approx(nt_ref.data()[i]).epsilon(1e-13));
}

TEST_CASE("matmul associativity on random triples") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        RngStream rng(100 + seed);
        const Matrix a = random_matrix(rng, 8, 8);
        const Matrix b = random_matrix(rng, 8, 8);
        const Matrix c = random_matrix(rng, 8, 8);
        const Matrix left = matmul(matmul(a, b), c);
        const Matrix right = matmul(a, matmul(b, c));
        for (std::size_t i = 0; i < left.size(); ++i)
            CHECK(std::fabs(left.data()[i] - right.data()[i]) < 1e-10);
    }
}

TEST_CASE("sample_gaussian degenerate scale and determinism") {
    RngStream rng1(42), rng2(42);
    const Matrix ones = sample_gaussian(rng1, 1.0, 0.0, 4, 5);
    for (std::size_t i = 0; i < ones.size(); ++i) CHECK(ones.data()[i] == 1.0);

    RngStream a(9), b(9);
    CHECK(sample_gaussian(a, 0.0, 1.0, 10, 10) == sample_gaussian(b, 0.0, 1.0, 10, 10));

    RngStream r(1);
    CHECK_THROWS_AS(sample_gaussian(r, 0.0, -1.0, 2, 2), std::invalid_argument);
}

TEST_CASE("sample_gaussian law of large numbers") {
    RngStream rng(2024);
    const std::size_t n = 100000;
    const Matrix s = sample_gaussian(rng, 1.0, 0.5, n, 1);
    const double mean = oracles::mean_of(s.values());
    const double var = oracles::variance_of(s.values());
    CHECK(std::fabs(mean - 1.0) < 0.01);
    CHECK(std::fabs(var - 0.25) < 0.01);
}

TEST_CASE("standard normal stream empirical mean bound") {
    const std::size_t n = 100000;
    RngStream rng(77);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += rng.next_normal();
    CHECK(std::fabs(s / n) < 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("rng stream is bitwise reproducible and seed-splittable") {
    RngStream a(123), b(123);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("normal_cdf values") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(normal_cdf(-10.0) < 1e-20);
    CHECK(normal_cdf(1.0) == doctest::Approx(0.8413447).epsilon(1e-6));
    // high-precision quadrature oracle for Phi(1)
    const double phi1 =
        0.5 + oracles::adaptive_simpson(
                  [](double x) { return std::exp(-x * x / 2.0) / std::sqrt(2.0 * M_PI); },
                  0.0, 1.0, 1e-14);
    CHECK(std::fabs(normal_cdf(1.0) - phi1) < 1e-9);
}

TEST_CASE("normal_cdf monotone and symmetric") {
    double prev = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double x = -8.0 + i * 0.08;
        const double v = normal_cdf(x);
        CHECK(v >= prev);
        prev = v;
        CHECK(std::fabs(normal_cdf(x) + normal_cdf(-x) - 1.0) < 1e-7);
    }
}

TEST_CASE("logsumexp basics") {
    const std::vector<double> two_zeros{0.0, 0.0};
    CHECK(logsumexp(two_zeros) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    const std::vector<double> huge{1000.0, 1000.0};
    CHECK(logsumexp(huge) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-14));
    CHECK_THROWS_AS(logsumexp(std::span<const double>{}), std::invalid_argument);
}

TEST_CASE("logsumexp matches naive at safe magnitudes and shifts") {
    RngStream rng(5);
    std::vector<double> v(100);
    for (auto& x : v) x = -5.0 + 10.0 * rng.next_double();
    const double ref = oracles::naive_logsumexp(v);
    CHECK(std::fabs(logsumexp(v) - ref) < 1e-12);
    for (double k : {-3.0, 0.25, 7.0}) {
        std::vector<double> shifted = v;
        for (auto& x : shifted) x += k;
        CHECK(std::fabs(logsumexp(shifted) - (logsumexp(v) + k)) < 1e-12);
    }
}

TEST_CASE("polynomial fit recovers exact polynomials") {
    std::vector<double> xs, ys;
    for (int i = 0; i <= 20; ++i) {
        const double x = -1.0 + 0.1 * i;
        xs.push_back(x);
        ys.push_back(2.0 + x - x * x * x);
    }
    const PolyCoeffs p = fit_least_squares_poly(xs, ys, 3);
    CHECK(p.c[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(p.c[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::fabs(p.c[2]) < 1e-9);
    CHECK(p.c[3] == doctest::Approx(-1.0).epsilon(1e-9));

    std::vector<double> flat(xs.size(), 5.0);
    const PolyCoeffs c = fit_least_squares_poly(xs, flat, 3);
    CHECK(c.c[0] == doctest::Approx(5.0).epsilon(1e-9));
    for (int k = 1; k < 4; ++k) CHECK(std::fabs(c.c[k]) < 1e-9);
}

TEST_CASE("polynomial fit residual tracks injected noise") {
    RngStream rng(31);
    std::vector<double> xs, ys;
    double noise_sq = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double x = i / 99.0;
        const double e = 0.05 * rng.next_normal();
        xs.push_back(x);
        ys.push_back(1.0 - 2.0 * x + 0.5 * x * x * x + e);
        noise_sq += e * e;
    }
    const double noise_rms = std::sqrt(noise_sq / xs.size());
    const PolyCoeffs p = fit_least_squares_poly(xs, ys, 3);
    double res_sq = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = p(xs[i]) - ys[i];
        res_sq += r * r;
    }
    CHECK(std::sqrt(res_sq / xs.size()) <= noise_rms * 1.1);
}

TEST_CASE("polynomial fit rejects degenerate input") {
    const std::vector<double> xs{0.0, 1.0, 2.0};
    const std::vector<double> ys{0.0, 1.0, 2.0};
    CHECK_THROWS_AS(fit_least_squares_poly(xs, ys, 3), std::invalid_argument);
    const std::vector<double> same_x{1.0, 1.0, 1.0, 1.0, 1.0};
    const std::vector<double> any_y{0.0, 1.0, 2.0, 3.0, 4.0};
    CHECK_THROWS_AS(fit_least_squares_poly(same_x, any_y, 3), std::invalid_argument);
}

TEST_CASE("poly_eval_and_grad") {
    PolyCoeffs cube;
    cube.c = {0.0, 0.0, 0.0, 1.0};
    const auto [v, d] = poly_eval_and_grad(cube, 2.0);
    CHECK(v == doctest::Approx(8.0));
    CHECK(d == doctest::Approx(12.0));

    PolyCoeffs constant;
    constant.c = {3.5, 0.0, 0.0, 0.0};
    for (double x : {-2.0, 0.0, 1.7}) {
        const auto [cv, cd] = poly_eval_and_grad(constant, x);
        CHECK(cv == doctest::Approx(3.5));
        CHECK(cd == 0.0);
    }

    RngStream rng(55);
    PolyCoeffs p;
    p.c = {rng.next_normal(), rng.next_normal(), rng.next_normal(), rng.next_normal()};
    const double x0 = 0.3;
    const auto [pv, pd] = poly_eval_and_grad(p, x0);
    const double fd = oracles::central_diff([&](double x) { return p(x); }, x0, 1e-6);
    CHECK(std::fabs(pd - fd) < 1e-6);
    CHECK(pv == doctest::Approx(p(x0)));
}

TEST_CASE("matrix invariants: finite outputs on finite inputs") {
    RngStream rng(64);
    const Matrix a = random_matrix(rng, 6, 6, -100.0, 100.0);
    const Matrix b = random_matrix(rng, 6, 6, -100.0, 100.0);
    CHECK(matmul(a, b).all_finite());
    CHECK(add(a, b).all_finite());
    CHECK(hadamard(a, b).all_finite());
}

TEST_CASE("normal quantile and CDF are mutual inverses") {
    // two independent approximations (Wichura vs Cody) agree through the
    // round trip
    for (int i = 1; i < 200; ++i) {
        const double p = i / 200.0;
        CHECK(std::fabs(normal_cdf(normal_quantile(p)) - p) < 1e-12);
    }
    // The lower tail keeps full relative precision in p; the upper tail
    // saturates toward 1 in double, so stop at x = 6 there.
    for (double x : {-8.0, -3.0, -0.5, 0.0, 1.0, 4.0, 6.0}) {
        CHECK(std::fabs(normal_quantile(normal_cdf(x)) - x) < 1e-7 * std::max(1.0, std::fabs(x)));
    }
    CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
    CHECK_THROWS_AS(normal_quantile(1.0), std::invalid_argument);
}
