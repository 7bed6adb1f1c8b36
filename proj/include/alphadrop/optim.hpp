#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "alphadrop/network.hpp"

namespace alphadrop {

// A mutable view of one parameter tensor plus its gradient, with an optional
// post-step clamp (used to keep log a in the table domain).
struct ParamRef {
    double* data = nullptr;
    const double* grad = nullptr;
    std::size_t n = 0;
    std::string name;
    bool has_clamp = false;
    double clamp_lo = 0.0;
    double clamp_hi = 0.0;
};

// Parameter views over a network and a matching gradient set; log a entries
// carry the [log kAMin, log kAMax] clamp. train_a = false omits log a.
std::vector<ParamRef> collect_params(Network& net, const NetworkGrads& grads,
                                     bool train_a);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Bias-corrected Adam. Accumulators are laid out to mirror the parameter
// list handed to the first step; later steps must pass the same layout.
class AdamState {
public:
    explicit AdamState(AdamConfig cfg = {}) : cfg_(cfg) {}

    // One update. Throws std::runtime_error naming the parameter if a
    // gradient is non-finite. Applies each ParamRef's clamp after the step.
    void step(const std::vector<ParamRef>& params, double lr);
    void step(const std::vector<ParamRef>& params) { step(params, cfg_.lr); }

    std::size_t step_count() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    std::size_t t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

// SGD with classical momentum, same contract as AdamState.
class SgdState {
public:
    explicit SgdState(double momentum = 0.9) : momentum_(momentum) {}
    void step(const std::vector<ParamRef>& params, double lr);
    std::size_t step_count() const { return t_; }

private:
    double momentum_;
    std::size_t t_ = 0;
    std::vector<std::vector<double>> vel_;
};

// Stops after `patience` epochs without improvement beyond 1e-6 absolute.
class EarlyStopper {
public:
    enum class Mode { Min, Max };

    EarlyStopper(std::size_t patience, Mode mode = Mode::Min)
        : patience_(patience), mode_(mode) {}

    // Feed one epoch metric; true means stop now.
    bool update(double metric);

    double best_metric() const { return best_; }
    std::size_t epochs_since_best() const { return since_best_; }

private:
    std::size_t patience_;
    Mode mode_;
    double best_ = std::numeric_limits<double>::quiet_NaN();
    std::size_t since_best_ = 0;
};

}  // namespace alphadrop
