#ifndef WARPCONV_NN_ADAM_HPP
#define WARPCONV_NN_ADAM_HPP

#include <cstdint>
#include <vector>

#include "warpconv/nn/layers.hpp"

namespace warpconv::nn {

struct AdamConfig {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    std::uint64_t step = 0;
    std::vector<std::vector<double>> first;   // one per parameter, same order
    std::vector<std::vector<double>> second;
};

AdamState make_adam_state(const std::vector<ParameterRef>& params);

/// One bias-corrected Adam update using the gradients currently stored in params.
void adam_step(const AdamConfig& config, AdamState& state, const std::vector<ParameterRef>& params);

}  // namespace warpconv::nn

#endif
