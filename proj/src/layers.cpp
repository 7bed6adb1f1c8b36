#include "alphadrop/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace alphadrop {

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::Plain: return "plain";
        case Variant::Bernoulli: return "bernoulli";
        case Variant::VarA: return "varA";
        case Variant::VarB: return "varB";
    }
    return "?";
}

Variant variant_from_name(const std::string& name) {
    if (name == "plain") return Variant::Plain;
    if (name == "bernoulli") return Variant::Bernoulli;
    if (name == "varA" || name == "vara") return Variant::VarA;
    if (name == "varB" || name == "varb") return Variant::VarB;
    throw std::invalid_argument("unknown layer variant: " + name);
}

double VarDropLayer::a() const {
    return std::clamp(std::exp(log_a), kAMin, kAMax);
}

Matrix apply_activation(const Matrix& pre, Activation act) {
    switch (act) {
        case Activation::Identity:
            return pre;
        case Activation::Relu: {
            Matrix out = pre;
            for (std::size_t i = 0; i < out.size(); ++i)
                if (out.data()[i] < 0.0) out.data()[i] = 0.0;
            return out;
        }
        case Activation::Softmax: {
            Matrix out = pre;
            for (std::size_t r = 0; r < out.rows(); ++r) {
                auto row = out.row(r);
                const double mx = *std::max_element(row.begin(), row.end());
                double s = 0.0;
                for (double& v : row) {
                    v = std::exp(v - mx);
                    s += v;
                }
                for (double& v : row) v /= s;
            }
            return out;
        }
    }
    throw std::logic_error("apply_activation: bad enum");
}

LayerNoise draw_layer_noise(const VarDropLayer& layer, std::size_t batch_rows,
                            RngStream& rng) {
    LayerNoise n;
    switch (layer.variant) {
        case Variant::Plain:
            break;
        case Variant::Bernoulli: {
            if (!(layer.p_fixed >= 0.0 && layer.p_fixed < 1.0))
                throw std::invalid_argument("bernoulli dropout: p_fixed must be in [0,1)");
            const double keep = 1.0 - layer.p_fixed;
            n.values = Matrix(batch_rows, layer.in_dim());
            for (std::size_t i = 0; i < n.values.size(); ++i)
                n.values.data()[i] = (rng.next_double() < keep) ? 1.0 / keep : 0.0;
            break;
        }
        case Variant::VarA:
            n.values = sample_gaussian(rng, 0.0, 1.0, batch_rows, layer.in_dim());
            break;
        case Variant::VarB:
            n.values = sample_gaussian(rng, 0.0, 1.0, batch_rows, layer.out_dim());
            break;
    }
    return n;
}

namespace {

Matrix linear(const Matrix& x, const VarDropLayer& layer) {
    Matrix pre = matmul(x, layer.theta);
    add_row_vector(pre, layer.bias);
    return pre;
}

}  // namespace

Matrix layer_forward(const Matrix& x, const VarDropLayer& layer,
                     const LayerNoise* noise, bool train, LayerCache* cache) {
    if (x.cols() != layer.in_dim())
        throw std::invalid_argument("layer_forward: input width " + std::to_string(x.cols()) +
                                    " != layer input dim " + std::to_string(layer.in_dim()));
    const bool noisy = layer.variant != Variant::Plain;
    if (train && noisy && noise == nullptr)
        throw std::invalid_argument("layer_forward: training a noisy variant needs noise");

    Matrix pre;
    if (cache) {
        *cache = LayerCache{};
        cache->train = train;
        cache->input = x;
        if (train && noisy) cache->noise = noise->values;
    }

    if (!train || layer.variant == Variant::Plain) {
        // Eval follows the noise mean for every variant; VarB's gamma is
        // exactly the plain pre-activation.
        pre = linear(x, layer);
    } else if (layer.variant == Variant::Bernoulli || layer.variant == Variant::VarA) {
        if (noise->values.rows() != x.rows() || noise->values.cols() != layer.in_dim())
            throw std::invalid_argument("layer_forward: noise shape mismatch");
        Matrix x_noisy = x;
        if (layer.variant == Variant::Bernoulli) {
            for (std::size_t i = 0; i < x_noisy.size(); ++i)
                x_noisy.data()[i] *= noise->values.data()[i];
        } else {
            const double sa = std::sqrt(layer.a());
            for (std::size_t i = 0; i < x_noisy.size(); ++i)
                x_noisy.data()[i] *= 1.0 + sa * noise->values.data()[i];
        }
        pre = linear(x_noisy, layer);
        if (cache) cache->x_noisy = std::move(x_noisy);
    } else {  // VarB
        if (noise->values.rows() != x.rows() || noise->values.cols() != layer.out_dim())
            throw std::invalid_argument("layer_forward: noise shape mismatch");
        Matrix gamma = linear(x, layer);
        Matrix x2 = hadamard(x, x);
        Matrix theta2 = hadamard(layer.theta, layer.theta);
        Matrix delta = matmul(x2, theta2);
        const double a = layer.a();
        for (std::size_t i = 0; i < delta.size(); ++i) {
            double d = a * delta.data()[i];
            if (d < 0.0) throw std::logic_error("layer_forward: negative variance entry");
            delta.data()[i] = d;
        }
        pre = gamma;
        for (std::size_t i = 0; i < pre.size(); ++i)
            pre.data()[i] += std::sqrt(delta.data()[i]) * noise->values.data()[i];
        if (cache) {
            cache->gamma = std::move(gamma);
            cache->delta = std::move(delta);
        }
    }

    if (cache) cache->pre = pre;
    return apply_activation(pre, layer.activation);
}

Matrix forward_plain(const Matrix& x, const VarDropLayer& layer) {
    return layer_forward(x, layer, nullptr, false, nullptr);
}

namespace {

Matrix forward_with_rng(const Matrix& x, const VarDropLayer& layer, RngStream& rng,
                        bool train) {
    if (!train) return layer_forward(x, layer, nullptr, false, nullptr);
    LayerNoise n = draw_layer_noise(layer, x.rows(), rng);
    return layer_forward(x, layer, &n, true, nullptr);
}

}  // namespace

Matrix forward_bernoulli(const Matrix& x, const VarDropLayer& layer, RngStream& rng,
                         bool train) {
    if (layer.variant != Variant::Bernoulli)
        throw std::invalid_argument("forward_bernoulli: wrong variant");
    return forward_with_rng(x, layer, rng, train);
}

Matrix forward_varA(const Matrix& x, const VarDropLayer& layer, RngStream& rng,
                    bool train) {
    if (layer.variant != Variant::VarA)
        throw std::invalid_argument("forward_varA: wrong variant");
    return forward_with_rng(x, layer, rng, train);
}

Matrix forward_varB(const Matrix& x, const VarDropLayer& layer, RngStream& rng,
                    bool train) {
    if (layer.variant != Variant::VarB)
        throw std::invalid_argument("forward_varB: wrong variant");
    return forward_with_rng(x, layer, rng, train);
}

LayerGrads layer_backward(const VarDropLayer& layer, const LayerCache& cache,
                          const Matrix& upstream) {
    if (!cache.train)
        throw std::invalid_argument("layer_backward: cache is not from a training forward");
    if (!upstream.same_shape(cache.pre))
        throw std::invalid_argument("layer_backward: upstream shape mismatch");
    if (layer.activation == Activation::Softmax)
        throw std::invalid_argument(
            "layer_backward: softmax head differentiates through softmax_cross_entropy");
    if (cache.input.cols() != layer.in_dim())
        throw std::invalid_argument("layer_backward: cache/layer mismatch");

    // d = dL/d(pre)
    Matrix d = upstream;
    if (layer.activation == Activation::Relu) {
        for (std::size_t i = 0; i < d.size(); ++i)
            if (cache.pre.data()[i] <= 0.0) d.data()[i] = 0.0;
    }

    LayerGrads g;
    g.bias = column_sums(d);
    g.log_a = 0.0;
    const double a = layer.a();

    switch (layer.variant) {
        case Variant::Plain: {
            g.theta = matmul_tn(cache.input, d);
            g.input = matmul_nt(d, layer.theta);
            break;
        }
        case Variant::Bernoulli: {
            g.theta = matmul_tn(cache.x_noisy, d);
            g.input = hadamard(matmul_nt(d, layer.theta), cache.noise);
            break;
        }
        case Variant::VarA: {
            g.theta = matmul_tn(cache.x_noisy, d);
            Matrix grad_xn = matmul_nt(d, layer.theta);
            const double sa = std::sqrt(a);
            g.input = grad_xn;
            double ga = 0.0;
            for (std::size_t i = 0; i < g.input.size(); ++i) {
                const double zeta = cache.noise.data()[i];
                // s = 1 + sqrt(a) zeta; ds/dlog a = zeta sqrt(a)/2
                ga += grad_xn.data()[i] * cache.input.data()[i] * zeta;
                g.input.data()[i] *= 1.0 + sa * zeta;
            }
            g.log_a = ga * 0.5 * sa;
            break;
        }
        case Variant::VarB: {
            // ddelta = dL/d(delta); contributions vanish where delta = 0.
            Matrix ddelta = d;
            for (std::size_t i = 0; i < ddelta.size(); ++i) {
                const double del = cache.delta.data()[i];
                ddelta.data()[i] = (del > 0.0)
                    ? d.data()[i] * cache.noise.data()[i] / (2.0 * std::sqrt(del))
                    : 0.0;
            }
            Matrix x2 = hadamard(cache.input, cache.input);
            Matrix theta2 = hadamard(layer.theta, layer.theta);
            g.theta = matmul_tn(cache.input, d);
            Matrix t_extra = matmul_tn(x2, ddelta);
            for (std::size_t i = 0; i < g.theta.size(); ++i)
                g.theta.data()[i] += 2.0 * a * layer.theta.data()[i] * t_extra.data()[i];
            double ga = 0.0;  // d(delta)/d(log a) = delta
            for (std::size_t i = 0; i < ddelta.size(); ++i)
                ga += ddelta.data()[i] * cache.delta.data()[i];
            g.log_a = ga;
            g.input = matmul_nt(d, layer.theta);
            Matrix in_extra = matmul_nt(ddelta, theta2);
            for (std::size_t i = 0; i < g.input.size(); ++i)
                g.input.data()[i] += 2.0 * a * cache.input.data()[i] * in_extra.data()[i];
            break;
        }
    }
    return g;
}

}  // namespace alphadrop
