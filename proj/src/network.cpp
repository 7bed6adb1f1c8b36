#include "alphadrop/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace alphadrop {

Matrix Network::forward(const Matrix& x, RngStream* rng, bool train,
                        std::vector<LayerCache>* caches) const {
    if (train && rng == nullptr)
        throw std::invalid_argument("Network::forward: training mode needs an rng");
    if (caches) caches->resize(layers.size());
    Matrix h = x;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        LayerNoise noise;
        const LayerNoise* np = nullptr;
        if (train && layers[i].variant != Variant::Plain) {
            noise = draw_layer_noise(layers[i], h.rows(), *rng);
            np = &noise;
        }
        h = layer_forward(h, layers[i], np, train, caches ? &(*caches)[i] : nullptr);
    }
    return h;
}

Matrix Network::forward_with_noise(const Matrix& x, const std::vector<LayerNoise>& noise,
                                   std::vector<LayerCache>* caches) const {
    if (noise.size() != layers.size())
        throw std::invalid_argument("forward_with_noise: one noise slot per layer");
    if (caches) caches->resize(layers.size());
    Matrix h = x;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const LayerNoise* np =
            (layers[i].variant != Variant::Plain) ? &noise[i] : nullptr;
        h = layer_forward(h, layers[i], np, true, caches ? &(*caches)[i] : nullptr);
    }
    return h;
}

NetworkGrads Network::backward(const Matrix& grad_logits,
                               const std::vector<LayerCache>& caches) const {
    if (caches.size() != layers.size())
        throw std::invalid_argument("Network::backward: cache/layer count mismatch");
    NetworkGrads grads;
    grads.layers.resize(layers.size());
    Matrix up = grad_logits;
    for (std::size_t i = layers.size(); i-- > 0;) {
        grads.layers[i] = layer_backward(layers[i], caches[i], up);
        up = std::move(grads.layers[i].input);
        grads.layers[i].input = Matrix();  // freed; only the first layer's is unused
    }
    return grads;
}

std::vector<int> Network::predict(const Matrix& x) const {
    Matrix logits = forward(x, nullptr, false);
    std::vector<int> out(logits.rows());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        auto row = logits.row(i);
        out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    return out;
}

Network make_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                 std::size_t classes, Variant variant, std::uint64_t seed,
                 double bernoulli_p) {
    Network net;
    std::vector<std::size_t> dims;
    dims.push_back(input_dim);
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(classes);
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        VarDropLayer layer;
        const std::size_t fan_in = dims[i];
        RngStream rng(derive_seed(seed, i));
        layer.theta = sample_gaussian(rng, 0.0, std::sqrt(2.0 / fan_in), fan_in, dims[i + 1]);
        layer.bias.assign(dims[i + 1], 0.0);
        layer.log_a = std::log(0.05);
        layer.variant = variant;
        layer.p_fixed = bernoulli_p;
        layer.activation =
            (i + 2 == dims.size()) ? Activation::Identity : Activation::Relu;
        net.layers.push_back(std::move(layer));
    }
    return net;
}

double classification_error(const Network& net, const Matrix& x,
                            const std::vector<int>& labels) {
    if (x.rows() != labels.size())
        throw std::invalid_argument("classification_error: size mismatch");
    if (x.rows() == 0) throw std::invalid_argument("classification_error: empty set");
    const std::vector<int> pred = net.predict(x);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] != labels[i]) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(pred.size());
}

}  // namespace alphadrop
