#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "alphadrop/optim.hpp"

using namespace alphadrop;

namespace {

ParamRef ref_of(double* data, const double* grad, std::size_t n, const char* name) {
    ParamRef r;
    r.data = data;
    r.grad = grad;
    r.n = n;
    r.name = name;
    return r;
}

}  // namespace

TEST_CASE("adam first step magnitude") {
    double w = 1.0, g = 0.37;
    AdamState adam;
    adam.step({ref_of(&w, &g, 1, "w")}, 0.001);
    // bias-corrected first step: lr * g / (|g| + eps)
    CHECK(w == doctest::Approx(1.0 - 0.001 * g / (std::fabs(g) + 1e-8)).epsilon(1e-9));
    CHECK(1.0 - w == doctest::Approx(0.001).epsilon(1e-4));
}

TEST_CASE("adam zero gradient leaves parameters unchanged") {
    double w = 2.5, g = 0.0;
    AdamState adam;
    for (int i = 0; i < 5; ++i) adam.step({ref_of(&w, &g, 1, "w")}, 0.01);
    CHECK(w == 2.5);
}

TEST_CASE("adam descends a quadratic") {
    double w = 1.0;
    AdamState adam;
    double prev = std::fabs(w);
    for (int i = 0; i < 3; ++i) {
        const double g = 2.0 * w;
        adam.step({ref_of(&w, &g, 1, "w")}, 0.05);
        CHECK(std::fabs(w) < prev);
        prev = std::fabs(w);
    }
}

TEST_CASE("adam first-step direction is gradient-scale invariant") {
    AdamConfig cfg;
    cfg.epsilon = 1e-12;
    double w1 = 1.0, w2 = 1.0;
    const double g1 = 0.003, g2 = 0.3;  // 100x scale
    AdamState a1(cfg), a2(cfg);
    a1.step({ref_of(&w1, &g1, 1, "w")}, 0.001);
    a2.step({ref_of(&w2, &g2, 1, "w")}, 0.001);
    CHECK(std::fabs((1.0 - w1) - (1.0 - w2)) < 1e-6);
}

TEST_CASE("adam clamps log a into the table domain") {
    double log_a = std::log(0.9);
    double g = -50.0;  // pushes log_a up hard
    ParamRef r = ref_of(&log_a, &g, 1, "layer0.log_a");
    r.has_clamp = true;
    r.clamp_lo = std::log(kAMin);
    r.clamp_hi = std::log(kAMax);
    AdamState adam;
    for (int i = 0; i < 200; ++i) adam.step({r}, 0.1);
    CHECK(log_a <= std::log(kAMax) + 1e-15);
    CHECK(std::exp(log_a) <= kAMax + 1e-12);

    g = 50.0;
    for (int i = 0; i < 400; ++i) adam.step({r}, 0.1);
    CHECK(log_a >= std::log(kAMin) - 1e-15);
}

TEST_CASE("adam names the parameter with a bad gradient") {
    double w = 1.0;
    const double g = std::numeric_limits<double>::quiet_NaN();
    AdamState adam;
    try {
        adam.step({ref_of(&w, &g, 1, "layer3.theta")}, 0.001);
        FAIL("expected error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("layer3.theta") != std::string::npos);
    }
}

TEST_CASE("sgd with momentum descends") {
    double w = 1.0;
    SgdState sgd(0.9);
    for (int i = 0; i < 20; ++i) {
        const double g = 2.0 * w;
        sgd.step({ref_of(&w, &g, 1, "w")}, 0.01);
    }
    CHECK(std::fabs(w) < 1.0);
}

TEST_CASE("early stopper: strictly improving never stops") {
    EarlyStopper s(3, EarlyStopper::Mode::Min);
    for (int i = 0; i < 50; ++i) CHECK_FALSE(s.update(1.0 - 0.01 * i));
    CHECK(s.epochs_since_best() == 0);
}

TEST_CASE("early stopper: flat sequence stops at the fourth flat epoch") {
    EarlyStopper s(3, EarlyStopper::Mode::Min);
    CHECK_FALSE(s.update(0.5));  // sets best
    CHECK_FALSE(s.update(0.5));  // flat 1
    CHECK_FALSE(s.update(0.5));  // flat 2
    CHECK_FALSE(s.update(0.5));  // flat 3
    CHECK(s.update(0.5));        // flat 4 -> stop
}

TEST_CASE("early stopper: stops a patience window after the last improvement") {
    EarlyStopper s(2, EarlyStopper::Mode::Min);
    CHECK_FALSE(s.update(1.0));
    CHECK_FALSE(s.update(0.8));
    CHECK_FALSE(s.update(0.6));  // last improvement
    CHECK_FALSE(s.update(0.6));
    CHECK_FALSE(s.update(0.61));
    CHECK(s.update(0.6));
    CHECK(s.best_metric() == doctest::Approx(0.6));
}

TEST_CASE("early stopper: max mode and improvement threshold") {
    EarlyStopper s(1, EarlyStopper::Mode::Max);
    CHECK_FALSE(s.update(0.1));
    CHECK_FALSE(s.update(0.1 + 1e-9));  // below the 1e-6 threshold: not an improvement
    CHECK(s.update(0.1));
    CHECK_THROWS_AS(s.update(std::numeric_limits<double>::infinity()),
                    std::invalid_argument);
}
