#include "alphadrop/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace alphadrop {

std::vector<ParamRef> collect_params(Network& net, const NetworkGrads& grads,
                                     bool train_a) {
    if (grads.layers.size() != net.layers.size())
        throw std::invalid_argument("collect_params: grad/layer count mismatch");
    std::vector<ParamRef> out;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        VarDropLayer& layer = net.layers[i];
        const LayerGrads& g = grads.layers[i];
        if (!g.theta.same_shape(layer.theta) || g.bias.size() != layer.bias.size())
            throw std::invalid_argument("collect_params: gradient shape mismatch at layer " +
                                        std::to_string(i));
        const std::string base = "layer" + std::to_string(i);
        out.push_back({layer.theta.data(), g.theta.data(), layer.theta.size(),
                       base + ".theta", false, 0.0, 0.0});
        out.push_back({layer.bias.data(), g.bias.data(), layer.bias.size(),
                       base + ".bias", false, 0.0, 0.0});
        if (train_a && layer.is_variational()) {
            out.push_back({&layer.log_a, &g.log_a, 1, base + ".log_a", true,
                           std::log(kAMin), std::log(kAMax)});
        }
    }
    return out;
}

namespace {

void check_layout(std::vector<std::vector<double>>& acc,
                  const std::vector<ParamRef>& params, const char* who) {
    if (acc.empty()) {
        acc.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) acc[i].assign(params[i].n, 0.0);
        return;
    }
    if (acc.size() != params.size())
        throw std::invalid_argument(std::string(who) + ": parameter list changed size");
    for (std::size_t i = 0; i < params.size(); ++i)
        if (acc[i].size() != params[i].n)
            throw std::invalid_argument(std::string(who) + ": parameter " + params[i].name +
                                        " changed length");
}

void check_finite(const ParamRef& p) {
    for (std::size_t k = 0; k < p.n; ++k)
        if (!std::isfinite(p.grad[k]))
            throw std::runtime_error("non-finite gradient in " + p.name);
}

void apply_clamp(const ParamRef& p) {
    if (!p.has_clamp) return;
    for (std::size_t k = 0; k < p.n; ++k)
        p.data[k] = std::clamp(p.data[k], p.clamp_lo, p.clamp_hi);
}

}  // namespace

void AdamState::step(const std::vector<ParamRef>& params, double lr) {
    check_layout(m_, params, "AdamState");
    check_layout(v_, params, "AdamState");
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const ParamRef& p = params[i];
        check_finite(p);
        double* m = m_[i].data();
        double* v = v_[i].data();
        for (std::size_t k = 0; k < p.n; ++k) {
            const double g = p.grad[k];
            m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g;
            v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g * g;
            const double mhat = m[k] / bc1;
            const double vhat = v[k] / bc2;
            p.data[k] -= lr * mhat / (std::sqrt(vhat) + cfg_.epsilon);
        }
        apply_clamp(p);
    }
}

void SgdState::step(const std::vector<ParamRef>& params, double lr) {
    check_layout(vel_, params, "SgdState");
    ++t_;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const ParamRef& p = params[i];
        check_finite(p);
        double* vel = vel_[i].data();
        for (std::size_t k = 0; k < p.n; ++k) {
            vel[k] = momentum_ * vel[k] + p.grad[k];
            p.data[k] -= lr * vel[k];
        }
        apply_clamp(p);
    }
}

bool EarlyStopper::update(double metric) {
    if (!std::isfinite(metric))
        throw std::invalid_argument("EarlyStopper: non-finite metric");
    const bool first = std::isnan(best_);
    const bool improved =
        first || (mode_ == Mode::Min ? metric < best_ - 1e-6 : metric > best_ + 1e-6);
    if (improved) {
        best_ = metric;
        since_best_ = 0;
        return false;
    }
    ++since_best_;
    return since_best_ > patience_;
}

}  // namespace alphadrop
