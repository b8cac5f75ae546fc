#ifndef WARPCONV_NN_NETWORK_HPP
#define WARPCONV_NN_NETWORK_HPP

#include <cstdint>
#include <memory>
#include <stdexcept>

#include "warpconv/nn/adam.hpp"
#include "warpconv/nn/front_block.hpp"
#include "warpconv/nn/layers.hpp"

namespace warpconv::nn {

/// Raised when a training step produces a non-finite loss.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/*
 * front block -> pool -> conv + ReLU -> dense + BN + ReLU + dropout
 *             -> dense + BN + ReLU + dropout -> logits
 */
struct NetworkSpec {
    std::size_t channels = 1;
    std::size_t length = 0;
    std::size_t classes = 2;

    FrontKind front_kind = FrontKind::Dtw;
    DtwConvSpec front{};

    std::size_t pool_size = 2;
    std::size_t pool_stride = 2;
    PoolKind pool_kind = PoolKind::Max;

    std::size_t conv_filters = 128;
    std::size_t conv_size = 5;
    std::size_t conv_stride = 1;

    std::size_t dense1 = 512;
    std::size_t dense2 = 256;
    double dropout = 0.5;
    double bn_momentum = 0.9;

    std::uint64_t seed = 0;

    /// Stable one-line description of every architectural field.
    std::string canonical() const;
    /// FNV-1a 64 of canonical().
    std::uint64_t hash() const;
};

class Network {
public:
    /// Builds and initializes the layer stack; throws SpecError naming the first layer whose shape fails.
    explicit Network(const NetworkSpec& spec);

    const NetworkSpec& spec() const { return spec_; }
    std::size_t layer_count() const { return layers_.size(); }
    Layer& layer(std::size_t k) { return *layers_.at(k); }
    FrontBlock& front() { return *front_; }

    /// Per-example shapes after each layer, starting with the input.
    const std::vector<Shape>& shapes() const { return shapes_; }

    Tensor forward(const Tensor& input, const ForwardContext& ctx);
    void backward(const Tensor& grad_logits);

    std::vector<ParameterRef> parameters();
    std::vector<ParameterRef> buffers();
    std::size_t parameter_count();
    void zero_grad();

private:
    NetworkSpec spec_;
    std::vector<std::unique_ptr<Layer>> layers_;
    std::vector<Shape> shapes_;
    FrontBlock* front_ = nullptr;
};

/// Forward in training mode, mean softmax cross-entropy, full backward and one
/// Adam update. Returns the loss before the update; optionally reports the
/// training-mode argmax of every example.
double train_step(Network& net, const Tensor& inputs, std::span<const std::size_t> labels, const AdamConfig& config,
                  AdamState& state, std::mt19937_64& rng, std::vector<std::size_t>* predictions = nullptr);

struct Evaluation {
    double loss = 0.0;
    double accuracy = 0.0;
};

/// Inference-mode loss and argmax accuracy, processed in chunks of batch_size.
Evaluation evaluate(Network& net, const Tensor& inputs, std::span<const std::size_t> labels,
                    std::size_t batch_size = 256);

}  // namespace warpconv::nn

#endif
