#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "alphadrop/layers.hpp"
#include "alphadrop/matrix.hpp"
#include "alphadrop/rng.hpp"

namespace alphadrop {

struct NetworkGrads {
    std::vector<LayerGrads> layers;
};

// Feed-forward stack; hidden layers relu, head identity (logits). One
// training run owns its network exclusively.
struct Network {
    std::vector<VarDropLayer> layers;

    std::size_t input_dim() const { return layers.front().in_dim(); }
    std::size_t output_dim() const { return layers.back().out_dim(); }

    // Logits. In training mode draws one noise tensor per noisy layer from
    // rng and, when caches != nullptr, records the tape for backward().
    Matrix forward(const Matrix& x, RngStream* rng, bool train,
                   std::vector<LayerCache>* caches = nullptr) const;

    // Forward with caller-supplied noise (tests freeze noise this way).
    Matrix forward_with_noise(const Matrix& x, const std::vector<LayerNoise>& noise,
                              std::vector<LayerCache>* caches) const;

    // Backprop from dL/dlogits through the recorded tape.
    NetworkGrads backward(const Matrix& grad_logits,
                          const std::vector<LayerCache>& caches) const;

    std::vector<int> predict(const Matrix& x) const;
};

// 784 -> hidden... -> classes MLP of the given variant (applied to every
// dense layer), He-initialized from `seed`, log a initialized to log(0.05).
Network make_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                 std::size_t classes, Variant variant, std::uint64_t seed,
                 double bernoulli_p = 0.5);

// Fraction of rows whose argmax logit misses the label.
double classification_error(const Network& net, const Matrix& x,
                            const std::vector<int>& labels);

}  // namespace alphadrop
