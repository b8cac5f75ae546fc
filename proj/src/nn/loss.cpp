#include "warpconv/nn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace warpconv::nn {

LossResult softmax_cross_entropy(const Tensor& logits, std::span<const std::size_t> labels) {
    if (logits.rank() != 2) throw std::invalid_argument("softmax_cross_entropy: logits must be [B, K]");
    const std::size_t batch = logits.dim(0);
    const std::size_t classes = logits.dim(1);
    if (labels.size() != batch)
        throw std::invalid_argument("softmax_cross_entropy: " + std::to_string(labels.size()) + " labels for batch " +
                                    std::to_string(batch));
    if (batch == 0) throw std::invalid_argument("softmax_cross_entropy: empty batch");

    LossResult r{0.0, Tensor(logits.shape()), Tensor(logits.shape())};
    const double inv_batch = 1.0 / static_cast<double>(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        if (labels[b] >= classes)
            throw std::invalid_argument("softmax_cross_entropy: label " + std::to_string(labels[b]) +
                                        " out of range");
        const double* z = logits.data() + b * classes;
        const double peak = *std::max_element(z, z + classes);
        double total = 0.0;
        for (std::size_t k = 0; k < classes; ++k) total += std::exp(z[k] - peak);
        const double log_total = std::log(total);
        r.loss += (log_total - (z[labels[b]] - peak)) * inv_batch;
        for (std::size_t k = 0; k < classes; ++k) {
            const double p = std::exp(z[k] - peak - log_total);
            r.probabilities[b * classes + k] = p;
            r.grad[b * classes + k] = (p - (k == labels[b] ? 1.0 : 0.0)) * inv_batch;
        }
    }
    return r;
}

std::vector<std::size_t> argmax_rows(const Tensor& logits) {
    const std::size_t batch = logits.dim(0);
    const std::size_t classes = logits.dim(1);
    std::vector<std::size_t> out(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        const double* z = logits.data() + b * classes;
        out[b] = static_cast<std::size_t>(std::max_element(z, z + classes) - z);
    }
    return out;
}

}  // namespace warpconv::nn
