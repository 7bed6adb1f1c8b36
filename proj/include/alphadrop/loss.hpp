#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "alphadrop/layers.hpp"
#include "alphadrop/matrix.hpp"
#include "alphadrop/poly_table.hpp"

namespace alphadrop {

// Pieces of the alpha-ELBO on one mini-batch. Minimizing neg_elbo maximizes
// the bound: expected log-likelihood scaled to the full dataset minus the
// divergence penalty.
struct LossBreakdown {
    double nll = 0.0;          // mean negative log-likelihood on the batch
    double ll_scaled = 0.0;    // (n_total / batch) * sum log p(y|x,w)
    double div_penalty = 0.0;  // sum over variational layers of weight_count * D_alpha
    double neg_elbo = 0.0;     // -ll_scaled + div_penalty
};

// Mean softmax cross-entropy and its gradient with respect to the logits,
// (softmax - onehot) / batch. Max-shifted; labels must lie in [0, classes).
std::pair<double, Matrix> softmax_cross_entropy(const Matrix& logits,
                                                const std::vector<int>& labels);

// Divergence penalty and its gradient with respect to each layer's log a.
// tables[i] backs layers[i]; non-variational layers take no table (nullptr)
// and contribute nothing. The fitted polynomial approximates -D_alpha, so
// each layer adds weight_count * (-table(a)).
double div_penalty(const std::vector<VarDropLayer>& layers,
                   const std::vector<const PolyApprox*>& tables,
                   std::vector<double>* grad_log_a = nullptr);

// Full loss bookkeeping for one batch (does not touch layer noise; the
// noise path is differentiated by layer_backward).
LossBreakdown alpha_elbo_loss(const Matrix& logits, const std::vector<int>& labels,
                              std::size_t n_total, std::size_t batch_size,
                              const std::vector<VarDropLayer>& layers,
                              const std::vector<const PolyApprox*>& tables);

}  // namespace alphadrop
