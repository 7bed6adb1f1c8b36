#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "alphadrop/matrix.hpp"
#include "alphadrop/rng.hpp"

namespace alphadrop {

enum class Variant { Plain, Bernoulli, VarA, VarB };
enum class Activation { Relu, Identity, Softmax };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

// Dense layer with deterministic weights theta (K x L), bias, and a
// per-layer trainable log dropout rate (a = p/(1-p), the Gaussian noise
// variance). variant selects how noise enters the forward pass:
//   Plain     - none
//   Bernoulli - binary input mask with fixed rate p_fixed, inverted scaling
//   VarA      - one multiplicative N(1,a) draw per input entry, shared
//               across all outputs (correlated weight noise)
//   VarB      - pre-activations sampled from the law induced by independent
//               per-weight noise N(theta, a theta^2), via mean gamma and
//               variance delta (local reparameterization)
struct VarDropLayer {
    Matrix theta;              // K x L
    std::vector<double> bias;  // L
    double log_a = 0.0;
    Variant variant = Variant::Plain;
    double p_fixed = 0.0;  // Bernoulli only
    Activation activation = Activation::Relu;

    std::size_t in_dim() const { return theta.rows(); }
    std::size_t out_dim() const { return theta.cols(); }
    std::size_t weight_count() const { return theta.size(); }
    double a() const;
    bool is_variational() const {
        return variant == Variant::VarA || variant == Variant::VarB;
    }
};

// a is kept inside the polynomial table domain.
inline constexpr double kAMin = 0.01;
inline constexpr double kAMax = 1.0;

// Noise drawn for one training-mode forward. Standard normals for VarA
// (rows x K) and VarB (rows x L); already-scaled keep mask for Bernoulli.
// Tests freeze gradients by passing zeroed or reused noise.
struct LayerNoise {
    Matrix values;
};

LayerNoise draw_layer_noise(const VarDropLayer& layer, std::size_t batch_rows,
                            RngStream& rng);

// Everything backward() needs to differentiate the sampled objective.
struct LayerCache {
    Matrix input;
    Matrix noise;    // as in LayerNoise
    Matrix x_noisy;  // VarA / Bernoulli: input after the multiplicative mask
    Matrix gamma;    // VarB pre-activation mean
    Matrix delta;    // VarB pre-activation variance
    Matrix pre;      // pre-activation actually fed to the nonlinearity
    bool train = false;
};

// Forward pass. Training mode requires noise for the noisy variants and, if
// cache is non-null, records the gradient tape. Eval mode is deterministic
// (noise mean) for every variant and ignores `noise`.
Matrix layer_forward(const Matrix& x, const VarDropLayer& layer,
                     const LayerNoise* noise, bool train, LayerCache* cache);

// Convenience wrappers mirroring the per-variant contracts.
Matrix forward_plain(const Matrix& x, const VarDropLayer& layer);
Matrix forward_bernoulli(const Matrix& x, const VarDropLayer& layer, RngStream& rng,
                         bool train);
Matrix forward_varA(const Matrix& x, const VarDropLayer& layer, RngStream& rng,
                    bool train);
Matrix forward_varB(const Matrix& x, const VarDropLayer& layer, RngStream& rng,
                    bool train);

struct LayerGrads {
    Matrix theta;
    std::vector<double> bias;
    double log_a = 0.0;
    Matrix input;
};

// Exact pathwise gradients of the sampled objective, given the upstream
// gradient with respect to this layer's activated output.
LayerGrads layer_backward(const VarDropLayer& layer, const LayerCache& cache,
                          const Matrix& upstream);

Matrix apply_activation(const Matrix& pre, Activation act);

}  // namespace alphadrop
