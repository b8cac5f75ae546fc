#ifndef WARPCONV_NN_LAYERS_HPP
#define WARPCONV_NN_LAYERS_HPP

#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "warpconv/dtw_layer.hpp"
#include "warpconv/nn/tensor.hpp"

namespace warpconv::nn {

/// Raised while chaining layer shapes; the message names the layer.
class SpecError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Trainable tensor or persistent buffer owned by a layer.
struct ParameterRef {
    std::string name;
    Shape shape;
    std::span<double> value;
    std::span<double> grad;  // empty for buffers
};

struct ForwardContext {
    Phase phase = Phase::Train;
    std::mt19937_64* rng = nullptr;  // required by stochastic layers in training
};

class Layer {
public:
    virtual ~Layer() = default;

    virtual std::string describe() const = 0;
    /// Per-example output shape for a per-example input shape.
    virtual Shape output_shape(const Shape& input) const = 0;

    virtual Tensor forward(const Tensor& input, const ForwardContext& ctx) = 0;
    /// Accumulates parameter gradients and returns the input gradient for the
    /// most recent forward call.
    virtual Tensor backward(const Tensor& grad_output) = 0;

    virtual std::vector<ParameterRef> parameters() { return {}; }
    virtual std::vector<ParameterRef> buffers() { return {}; }
    virtual void initialize(std::mt19937_64&) {}
};

/// Uniform(-b, b) with b = sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(std::span<double> values, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng);

/// Valid 1-D cross-correlation over a [C, L] volume: weight [F, C, N], bias [F].
class Conv1D : public Layer {
public:
    Conv1D(std::string name, std::size_t in_channels, std::size_t filters, std::size_t size, std::size_t stride);

    std::string describe() const override;
    Shape output_shape(const Shape& input) const override;
    Tensor forward(const Tensor& input, const ForwardContext& ctx) override;
    Tensor backward(const Tensor& grad_output) override;
    std::vector<ParameterRef> parameters() override;
    void initialize(std::mt19937_64& rng) override;

    std::span<double> weight() { return weight_; }
    std::span<double> bias() { return bias_; }

private:
    std::string name_;
    std::size_t in_channels_, filters_, size_, stride_;
    std::vector<double> weight_, bias_, grad_weight_, grad_bias_;
    Tensor input_;
};

class ReLU : public Layer {
public:
    std::string describe() const override { return "relu"; }
    Shape output_shape(const Shape& input) const override { return input; }
    Tensor forward(const Tensor& input, const ForwardContext& ctx) override;
    Tensor backward(const Tensor& grad_output) override;

private:
    Tensor input_;
};

enum class PoolKind { Max, Mean };

/// Pooling along the last axis of a [C, L] volume.
class Pool1D : public Layer {
public:
    Pool1D(std::size_t size, std::size_t stride, PoolKind kind);

    std::string describe() const override;
    Shape output_shape(const Shape& input) const override;
    Tensor forward(const Tensor& input, const ForwardContext& ctx) override;
    Tensor backward(const Tensor& grad_output) override;

private:
    std::size_t size_, stride_;
    PoolKind kind_;
    Shape input_shape_;
    std::vector<std::size_t> argmax_;
};

/// Fully connected layer; flattens every per-example input.
class Dense : public Layer {
public:
    Dense(std::string name, std::size_t inputs, std::size_t units);

    std::string describe() const override;
    Shape output_shape(const Shape& input) const override;
    Tensor forward(const Tensor& input, const ForwardContext& ctx) override;
    Tensor backward(const Tensor& grad_output) override;
    std::vector<ParameterRef> parameters() override;
    void initialize(std::mt19937_64& rng) override;

    std::span<double> weight() { return weight_; }
    std::span<double> bias() { return bias_; }

private:
    std::string name_;
    std::size_t inputs_, units_;
    std::vector<double> weight_, bias_, grad_weight_, grad_bias_;  // weight is [inputs, units]
    std::vector<double> transposed_;
    Tensor input_;
};

/// Per-feature batch normalization over [B, F]. Training uses batch
/// statistics and updates running estimates with the given momentum.
class BatchNorm : public Layer {
public:
    BatchNorm(std::string name, std::size_t features, double momentum = 0.9, double epsilon = 1e-5);

    std::string describe() const override;
    Shape output_shape(const Shape& input) const override;
    Tensor forward(const Tensor& input, const ForwardContext& ctx) override;
    Tensor backward(const Tensor& grad_output) override;
    std::vector<ParameterRef> parameters() override;
    std::vector<ParameterRef> buffers() override;
    void initialize(std::mt19937_64& rng) override;

    std::span<const double> running_mean() const { return running_mean_; }
    std::span<const double> running_var() const { return running_var_; }

private:
    std::string name_;
    std::size_t features_;
    double momentum_, epsilon_;
    std::vector<double> gamma_, beta_, grad_gamma_, grad_beta_;
    std::vector<double> running_mean_, running_var_;
    Phase last_phase_ = Phase::Train;
    std::vector<double> xhat_, inv_std_;
};

/// Inverted dropout: training zeroes each unit with probability p and scales
/// survivors by 1/(1-p); inference is the identity.
class Dropout : public Layer {
public:
    explicit Dropout(double drop_probability);

    std::string describe() const override;
    Shape output_shape(const Shape& input) const override { return input; }
    Tensor forward(const Tensor& input, const ForwardContext& ctx) override;
    Tensor backward(const Tensor& grad_output) override;

    std::span<const double> last_mask() const { return scale_; }

private:
    double p_;
    std::vector<double> scale_;
};

}  // namespace warpconv::nn

#endif
