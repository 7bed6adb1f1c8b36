#include "alphadrop/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace alphadrop {

std::pair<double, Matrix> softmax_cross_entropy(const Matrix& logits,
                                                const std::vector<int>& labels) {
    if (labels.size() != logits.rows())
        throw std::invalid_argument("softmax_cross_entropy: batch size mismatch");
    const std::size_t M = logits.rows(), C = logits.cols();
    Matrix grad(M, C);
    double loss = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= C)
            throw std::invalid_argument("softmax_cross_entropy: label " + std::to_string(y) +
                                        " outside [0," + std::to_string(C) + ")");
        auto row = logits.row(i);
        const double mx = *std::max_element(row.begin(), row.end());
        double s = 0.0;
        for (double v : row) s += std::exp(v - mx);
        const double logz = mx + std::log(s);
        loss += logz - row[y];
        double* grow = grad.data() + i * C;
        for (std::size_t j = 0; j < C; ++j)
            grow[j] = std::exp(row[j] - logz) / static_cast<double>(M);
        grow[y] -= 1.0 / static_cast<double>(M);
    }
    return {loss / static_cast<double>(M), std::move(grad)};
}

double div_penalty(const std::vector<VarDropLayer>& layers,
                   const std::vector<const PolyApprox*>& tables,
                   std::vector<double>* grad_log_a) {
    if (tables.size() != layers.size())
        throw std::invalid_argument("div_penalty: one table slot per layer required");
    if (grad_log_a) grad_log_a->assign(layers.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const VarDropLayer& layer = layers[i];
        if (!layer.is_variational()) continue;
        if (tables[i] == nullptr)
            throw std::invalid_argument("div_penalty: variational layer " +
                                        std::to_string(i) + " has no table");
        const double wc = static_cast<double>(layer.weight_count());
        const double log_a = std::log(layer.a());
        const auto [neg_d, dneg_d] = tables[i]->value_and_grad_log_a(log_a);
        total += wc * (-neg_d);
        if (grad_log_a) (*grad_log_a)[i] = wc * (-dneg_d);
    }
    return total;
}

LossBreakdown alpha_elbo_loss(const Matrix& logits, const std::vector<int>& labels,
                              std::size_t n_total, std::size_t batch_size,
                              const std::vector<VarDropLayer>& layers,
                              const std::vector<const PolyApprox*>& tables) {
    if (batch_size == 0 || batch_size != logits.rows())
        throw std::invalid_argument("alpha_elbo_loss: batch size mismatch");
    LossBreakdown out;
    out.nll = softmax_cross_entropy(logits, labels).first;
    // sum log p = -batch * nll, scaled by n_total / batch
    out.ll_scaled = -static_cast<double>(n_total) * out.nll;
    out.div_penalty = div_penalty(layers, tables);
    out.neg_elbo = -out.ll_scaled + out.div_penalty;
    if (!std::isfinite(out.neg_elbo))
        throw std::runtime_error("alpha_elbo_loss: non-finite objective");
    return out;
}

}  // namespace alphadrop
