#ifndef WARPCONV_NN_LOSS_HPP
#define WARPCONV_NN_LOSS_HPP

#include <span>

#include "warpconv/nn/tensor.hpp"

namespace warpconv::nn {

struct LossResult {
    double loss = 0.0;  // mean over the batch
    Tensor grad;        // d loss / d logits
    Tensor probabilities;
};

/// Softmax cross-entropy over [B, K] logits using the max-shifted log-sum-exp.
LossResult softmax_cross_entropy(const Tensor& logits, std::span<const std::size_t> labels);

std::vector<std::size_t> argmax_rows(const Tensor& logits);

}  // namespace warpconv::nn

#endif
