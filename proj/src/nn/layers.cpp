#include "warpconv/nn/layers.hpp"

#include <algorithm>
#include <cmath>

namespace warpconv::nn {

namespace {

constexpr std::size_t kBlock = 64;  // rows of the weight matrix kept hot per sweep over the batch

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) y[k] += a * x[k];
}


void require_rank(const Shape& input, std::size_t rank, const std::string& layer) {
    if (input.size() != rank)
        throw SpecError(layer + ": expected rank-" + std::to_string(rank) + " input, got " + shape_string(input));
}

Shape with_batch(std::size_t batch, const Shape& per_example) {
    Shape s{batch};
    s.insert(s.end(), per_example.begin(), per_example.end());
    return s;
}

Shape per_example_shape(const Tensor& t) { return Shape(t.shape().begin() + 1, t.shape().end()); }

}  // namespace

void glorot_uniform(std::span<double> values, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& v : values) v = dist(rng);
}

// ---------------------------------------------------------------------------
// Conv1D

Conv1D::Conv1D(std::string name, std::size_t in_channels, std::size_t filters, std::size_t size, std::size_t stride)
    : name_(std::move(name)), in_channels_(in_channels), filters_(filters), size_(size), stride_(stride),
      weight_(filters * in_channels * size, 0.0), bias_(filters, 0.0), grad_weight_(weight_.size(), 0.0),
      grad_bias_(filters, 0.0) {
    if (in_channels == 0 || filters == 0 || size == 0 || stride == 0)
        throw SpecError(name_ + ": channels, filters, size and stride must be >= 1");
}

std::string Conv1D::describe() const {
    return "conv1d(" + name_ + ",in=" + std::to_string(in_channels_) + ",filters=" + std::to_string(filters_) +
           ",size=" + std::to_string(size_) + ",stride=" + std::to_string(stride_) + ")";
}

Shape Conv1D::output_shape(const Shape& input) const {
    require_rank(input, 2, describe());
    if (input[0] != in_channels_)
        throw SpecError(describe() + ": input has " + std::to_string(input[0]) + " channels");
    if (input[1] < size_)
        throw SpecError(describe() + ": input length " + std::to_string(input[1]) + " shorter than filter");
    return {filters_, (input[1] - size_) / stride_ + 1};
}

Tensor Conv1D::forward(const Tensor& input, const ForwardContext&) {
    const Shape out_shape = output_shape(per_example_shape(input));
    const std::size_t length = input.dim(2);
    const std::size_t width = out_shape[1];
    input_ = input;
    Tensor out(with_batch(input.batch(), out_shape));
    for (std::size_t b = 0; b < input.batch(); ++b) {
        const double* x = input.data() + b * in_channels_ * length;
        double* y = out.data() + b * filters_ * width;
        for (std::size_t f = 0; f < filters_; ++f) {
            const double* w = weight_.data() + f * in_channels_ * size_;
            for (std::size_t t = 0; t < width; ++t) {
                double acc = 0.0;
                for (std::size_t c = 0; c < in_channels_; ++c) {
                    const double* xc = x + c * length + t * stride_;
                    const double* wc = w + c * size_;
                    for (std::size_t k = 0; k < size_; ++k) acc += wc[k] * xc[k];
                }
                y[f * width + t] = acc + bias_[f];
            }
        }
    }
    return out;
}

Tensor Conv1D::backward(const Tensor& grad_output) {
    const std::size_t length = input_.dim(2);
    const std::size_t width = grad_output.dim(2);
    Tensor dx(input_.shape());
    for (std::size_t b = 0; b < input_.batch(); ++b) {
        const double* x = input_.data() + b * in_channels_ * length;
        double* gx = dx.data() + b * in_channels_ * length;
        const double* g = grad_output.data() + b * filters_ * width;
        for (std::size_t f = 0; f < filters_; ++f) {
            const double* w = weight_.data() + f * in_channels_ * size_;
            double* gw = grad_weight_.data() + f * in_channels_ * size_;
            for (std::size_t t = 0; t < width; ++t) {
                const double delta = g[f * width + t];
                if (delta == 0.0) continue;
                grad_bias_[f] += delta;
                for (std::size_t c = 0; c < in_channels_; ++c) {
                    const double* xc = x + c * length + t * stride_;
                    double* gxc = gx + c * length + t * stride_;
                    for (std::size_t k = 0; k < size_; ++k) {
                        gw[c * size_ + k] += delta * xc[k];
                        gxc[k] += delta * w[c * size_ + k];
                    }
                }
            }
        }
    }
    return dx;
}

std::vector<ParameterRef> Conv1D::parameters() {
    return {{name_ + ".weight", {filters_, in_channels_, size_}, weight_, grad_weight_},
            {name_ + ".bias", {filters_}, bias_, grad_bias_}};
}

void Conv1D::initialize(std::mt19937_64& rng) {
    glorot_uniform(weight_, in_channels_ * size_, filters_ * size_, rng);
    std::fill(bias_.begin(), bias_.end(), 0.0);
}

// ---------------------------------------------------------------------------
// ReLU

Tensor ReLU::forward(const Tensor& input, const ForwardContext&) {
    input_ = input;
    Tensor out(input.shape());
    for (std::size_t k = 0; k < input.size(); ++k) out[k] = input[k] > 0.0 ? input[k] : 0.0;
    return out;
}

Tensor ReLU::backward(const Tensor& grad_output) {
    Tensor dx(input_.shape());
    for (std::size_t k = 0; k < dx.size(); ++k) dx[k] = input_[k] > 0.0 ? grad_output[k] : 0.0;
    return dx;
}

// ---------------------------------------------------------------------------
// Pool1D

Pool1D::Pool1D(std::size_t size, std::size_t stride, PoolKind kind) : size_(size), stride_(stride), kind_(kind) {
    if (size == 0 || stride == 0) throw SpecError("pool: size and stride must be >= 1");
}

std::string Pool1D::describe() const {
    return std::string(kind_ == PoolKind::Max ? "maxpool" : "meanpool") + "(size=" + std::to_string(size_) +
           ",stride=" + std::to_string(stride_) + ")";
}

Shape Pool1D::output_shape(const Shape& input) const {
    require_rank(input, 2, describe());
    if (input[1] < size_)
        throw SpecError(describe() + ": input length " + std::to_string(input[1]) + " shorter than pool");
    return {input[0], (input[1] - size_) / stride_ + 1};
}

Tensor Pool1D::forward(const Tensor& input, const ForwardContext&) {
    const Shape out_shape = output_shape(per_example_shape(input));
    input_shape_ = input.shape();
    const std::size_t rows = input.batch() * input.dim(1);
    const std::size_t length = input.dim(2);
    const std::size_t width = out_shape[1];
    Tensor out(with_batch(input.batch(), out_shape));
    if (kind_ == PoolKind::Max) argmax_.assign(out.size(), 0);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* x = input.data() + r * length;
        for (std::size_t t = 0; t < width; ++t) {
            const std::size_t base = t * stride_;
            if (kind_ == PoolKind::Max) {
                std::size_t best = base;
                for (std::size_t k = 1; k < size_; ++k)
                    if (x[base + k] > x[best]) best = base + k;
                out[r * width + t] = x[best];
                argmax_[r * width + t] = best;
            } else {
                double s = 0.0;
                for (std::size_t k = 0; k < size_; ++k) s += x[base + k];
                out[r * width + t] = s / static_cast<double>(size_);
            }
        }
    }
    return out;
}

Tensor Pool1D::backward(const Tensor& grad_output) {
    Tensor dx(input_shape_);
    const std::size_t rows = input_shape_[0] * input_shape_[1];
    const std::size_t length = input_shape_[2];
    const std::size_t width = grad_output.dim(2);
    for (std::size_t r = 0; r < rows; ++r) {
        double* gx = dx.data() + r * length;
        for (std::size_t t = 0; t < width; ++t) {
            const double g = grad_output[r * width + t];
            if (kind_ == PoolKind::Max) {
                gx[argmax_[r * width + t]] += g;
            } else {
                for (std::size_t k = 0; k < size_; ++k) gx[t * stride_ + k] += g / static_cast<double>(size_);
            }
        }
    }
    return dx;
}

// ---------------------------------------------------------------------------
// Dense

Dense::Dense(std::string name, std::size_t inputs, std::size_t units)
    : name_(std::move(name)), inputs_(inputs), units_(units), weight_(inputs * units, 0.0), bias_(units, 0.0),
      grad_weight_(weight_.size(), 0.0), grad_bias_(units, 0.0) {
    if (inputs == 0 || units == 0) throw SpecError(name_ + ": inputs and units must be >= 1");
}

std::string Dense::describe() const {
    return "dense(" + name_ + ",in=" + std::to_string(inputs_) + ",units=" + std::to_string(units_) + ")";
}

Shape Dense::output_shape(const Shape& input) const {
    if (element_count(input) != inputs_)
        throw SpecError(describe() + ": input " + shape_string(input) + " flattens to " +
                        std::to_string(element_count(input)) + " features");
    return {units_};
}

Tensor Dense::forward(const Tensor& input, const ForwardContext&) {
    output_shape(per_example_shape(input));
    input_ = input;
    const std::size_t batch = input.batch();
    Tensor out({batch, units_});
    for (std::size_t b = 0; b < batch; ++b) std::copy(bias_.begin(), bias_.end(), out.data() + b * units_);
    for (std::size_t i0 = 0; i0 < inputs_; i0 += kBlock) {
        const std::size_t i1 = std::min(inputs_, i0 + kBlock);
        for (std::size_t b = 0; b < batch; ++b) {
            const double* x = input.data() + b * inputs_;
            double* y = out.data() + b * units_;
            for (std::size_t i = i0; i < i1; ++i)
                if (x[i] != 0.0) axpy(x[i], weight_.data() + i * units_, y, units_);
        }
    }
    return out;
}

Tensor Dense::backward(const Tensor& grad_output) {
    const std::size_t batch = input_.batch();
    for (std::size_t b = 0; b < batch; ++b)
        axpy(1.0, grad_output.data() + b * units_, grad_bias_.data(), units_);
    for (std::size_t i0 = 0; i0 < inputs_; i0 += kBlock) {
        const std::size_t i1 = std::min(inputs_, i0 + kBlock);
        for (std::size_t b = 0; b < batch; ++b) {
            const double* x = input_.data() + b * inputs_;
            const double* g = grad_output.data() + b * units_;
            for (std::size_t i = i0; i < i1; ++i)
                if (x[i] != 0.0) axpy(x[i], g, grad_weight_.data() + i * units_, units_);
        }
    }
    transposed_.resize(weight_.size());
    for (std::size_t i = 0; i < inputs_; ++i)
        for (std::size_t u = 0; u < units_; ++u) transposed_[u * inputs_ + i] = weight_[i * units_ + u];
    Tensor dx(input_.shape());
    for (std::size_t u0 = 0; u0 < units_; u0 += kBlock) {
        const std::size_t u1 = std::min(units_, u0 + kBlock);
        for (std::size_t b = 0; b < batch; ++b) {
            const double* g = grad_output.data() + b * units_;
            double* gx = dx.data() + b * inputs_;
            for (std::size_t u = u0; u < u1; ++u)
                if (g[u] != 0.0) axpy(g[u], transposed_.data() + u * inputs_, gx, inputs_);
        }
    }
    return dx;
}

std::vector<ParameterRef> Dense::parameters() {
    return {{name_ + ".weight", {inputs_, units_}, weight_, grad_weight_},
            {name_ + ".bias", {units_}, bias_, grad_bias_}};
}

void Dense::initialize(std::mt19937_64& rng) {
    glorot_uniform(weight_, inputs_, units_, rng);
    std::fill(bias_.begin(), bias_.end(), 0.0);
}

// ---------------------------------------------------------------------------
// BatchNorm

BatchNorm::BatchNorm(std::string name, std::size_t features, double momentum, double epsilon)
    : name_(std::move(name)), features_(features), momentum_(momentum), epsilon_(epsilon), gamma_(features, 1.0),
      beta_(features, 0.0), grad_gamma_(features, 0.0), grad_beta_(features, 0.0), running_mean_(features, 0.0),
      running_var_(features, 1.0) {}

std::string BatchNorm::describe() const {
    return "batchnorm(" + name_ + ",features=" + std::to_string(features_) + ")";
}

Shape BatchNorm::output_shape(const Shape& input) const {
    if (input.size() != 1 || input[0] != features_)
        throw SpecError(describe() + ": expected [" + std::to_string(features_) + "], got " + shape_string(input));
    return input;
}

Tensor BatchNorm::forward(const Tensor& input, const ForwardContext& ctx) {
    output_shape(per_example_shape(input));
    const std::size_t batch = input.batch();
    Tensor out(input.shape());
    last_phase_ = ctx.phase;
    inv_std_.assign(features_, 0.0);
    xhat_.assign(input.size(), 0.0);
    if (ctx.phase == Phase::Infer) {
        for (std::size_t f = 0; f < features_; ++f) inv_std_[f] = 1.0 / std::sqrt(running_var_[f] + epsilon_);
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t f = 0; f < features_; ++f) {
                const std::size_t k = b * features_ + f;
                xhat_[k] = (input[k] - running_mean_[f]) * inv_std_[f];
                out[k] = gamma_[f] * xhat_[k] + beta_[f];
            }
        return out;
    }
    std::vector<double> mean(features_, 0.0), var(features_, 0.0);
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t f = 0; f < features_; ++f) mean[f] += input[b * features_ + f];
    for (auto& m : mean) m /= static_cast<double>(batch);
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t f = 0; f < features_; ++f) {
            const double d = input[b * features_ + f] - mean[f];
            var[f] += d * d;
        }
    for (auto& v : var) v /= static_cast<double>(batch);
    const double unbias = batch > 1 ? static_cast<double>(batch) / static_cast<double>(batch - 1) : 1.0;
    for (std::size_t f = 0; f < features_; ++f) {
        inv_std_[f] = 1.0 / std::sqrt(var[f] + epsilon_);
        running_mean_[f] = momentum_ * running_mean_[f] + (1.0 - momentum_) * mean[f];
        running_var_[f] = momentum_ * running_var_[f] + (1.0 - momentum_) * var[f] * unbias;
    }
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t f = 0; f < features_; ++f) {
            const std::size_t k = b * features_ + f;
            xhat_[k] = (input[k] - mean[f]) * inv_std_[f];
            out[k] = gamma_[f] * xhat_[k] + beta_[f];
        }
    return out;
}

Tensor BatchNorm::backward(const Tensor& grad_output) {
    const std::size_t batch = grad_output.batch();
    Tensor dx(grad_output.shape());
    std::vector<double> sum_g(features_, 0.0), sum_gx(features_, 0.0);
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t f = 0; f < features_; ++f) {
            const std::size_t k = b * features_ + f;
            sum_g[f] += grad_output[k];
            sum_gx[f] += grad_output[k] * xhat_[k];
        }
    for (std::size_t f = 0; f < features_; ++f) {
        grad_gamma_[f] += sum_gx[f];
        grad_beta_[f] += sum_g[f];
    }
    if (last_phase_ == Phase::Infer) {
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t f = 0; f < features_; ++f) {
                const std::size_t k = b * features_ + f;
                dx[k] = grad_output[k] * gamma_[f] * inv_std_[f];
            }
        return dx;
    }
    const double m = static_cast<double>(batch);
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t f = 0; f < features_; ++f) {
            const std::size_t k = b * features_ + f;
            dx[k] = gamma_[f] * inv_std_[f] / m * (m * grad_output[k] - sum_g[f] - xhat_[k] * sum_gx[f]);
        }
    return dx;
}

std::vector<ParameterRef> BatchNorm::parameters() {
    return {{name_ + ".gamma", {features_}, gamma_, grad_gamma_}, {name_ + ".beta", {features_}, beta_, grad_beta_}};
}

std::vector<ParameterRef> BatchNorm::buffers() {
    return {{name_ + ".running_mean", {features_}, running_mean_, {}},
            {name_ + ".running_var", {features_}, running_var_, {}}};
}

void BatchNorm::initialize(std::mt19937_64&) {
    std::fill(gamma_.begin(), gamma_.end(), 1.0);
    std::fill(beta_.begin(), beta_.end(), 0.0);
    std::fill(running_mean_.begin(), running_mean_.end(), 0.0);
    std::fill(running_var_.begin(), running_var_.end(), 1.0);
}

// ---------------------------------------------------------------------------
// Dropout

Dropout::Dropout(double drop_probability) : p_(drop_probability) {
    if (!(p_ >= 0.0 && p_ < 1.0)) throw SpecError("dropout: probability must lie in [0, 1)");
}

std::string Dropout::describe() const { return "dropout(p=" + std::to_string(p_) + ")"; }

Tensor Dropout::forward(const Tensor& input, const ForwardContext& ctx) {
    Tensor out(input.shape());
    scale_.assign(input.size(), 1.0);
    if (ctx.phase == Phase::Infer || p_ == 0.0) {
        std::copy(input.values().begin(), input.values().end(), out.values().begin());
        return out;
    }
    if (ctx.rng == nullptr) throw std::invalid_argument("dropout: training pass needs a random generator");
    const double keep = 1.0 - p_;
    std::bernoulli_distribution survive(keep);
    for (std::size_t k = 0; k < input.size(); ++k) {
        scale_[k] = survive(*ctx.rng) ? 1.0 / keep : 0.0;
        out[k] = input[k] * scale_[k];
    }
    return out;
}

Tensor Dropout::backward(const Tensor& grad_output) {
    Tensor dx(grad_output.shape());
    for (std::size_t k = 0; k < dx.size(); ++k) dx[k] = grad_output[k] * scale_[k];
    return dx;
}

}  // namespace warpconv::nn
