#include "warpconv/nn/front_block.hpp"

#include <algorithm>

namespace warpconv::nn {

std::string_view to_string(FrontKind kind) { return kind == FrontKind::Dtw ? "dtw" : "standard"; }

FrontKind parse_front_kind(std::string_view text) {
    if (text == "dtw") return FrontKind::Dtw;
    if (text == "standard" || text == "cnn") return FrontKind::Standard;
    throw std::invalid_argument("unknown front block kind '" + std::string(text) + "' (expected dtw|standard)");
}

FrontBlock::FrontBlock(std::string name, FrontKind kind, std::size_t channels, DtwConvSpec spec)
    : name_(std::move(name)), kind_(kind), channels_(channels), spec_(spec) {
    if (channels == 0) throw SpecError(name_ + ": channel count must be >= 1");
    if (spec.filters == 0 || spec.size == 0 || spec.stride == 0)
        throw SpecError(name_ + ": filters, size and stride must be >= 1");
    spec_.activation = Activation::ReLU;
    if (kind_ == FrontKind::Standard) spec_.apply_mode = ApplyMode::Never;
    layers_.reserve(channels);
    for (std::size_t c = 0; c < channels; ++c) {
        layers_.emplace_back(spec_);
        grad_filters_.emplace_back(spec_.filters * spec_.size, 0.0);
        grad_bias_.emplace_back(spec_.filters, 0.0);
    }
}

std::string FrontBlock::describe() const {
    std::string s = "front(" + name_ + ",kind=" + std::string(to_string(kind_)) + ",channels=" +
                    std::to_string(channels_) + ",filters=" + std::to_string(spec_.filters) +
                    ",size=" + std::to_string(spec_.size) + ",stride=" + std::to_string(spec_.stride);
    if (kind_ == FrontKind::Dtw)
        s += ",r=" + std::to_string(spec_.band.radius) + ",mode=" + std::string(to_string(spec_.mode)) +
             ",apply=" + std::string(to_string(spec_.apply_mode));
    return s + ")";
}

Shape FrontBlock::output_shape(const Shape& input) const {
    if (input.size() != 2) throw SpecError(describe() + ": expected [C, L] input, got " + shape_string(input));
    if (input[0] != channels_)
        throw SpecError(describe() + ": input has " + std::to_string(input[0]) + " channels");
    if (input[1] < spec_.size)
        throw SpecError(describe() + ": input length " + std::to_string(input[1]) + " shorter than filter size");
    return {channels_ * spec_.filters, output_width(input[1], spec_.size, spec_.stride)};
}

Tensor FrontBlock::forward(const Tensor& input, const ForwardContext& ctx) {
    const Shape out_shape = output_shape(Shape(input.shape().begin() + 1, input.shape().end()));
    const std::size_t batch = input.batch();
    input_length_ = input.dim(2);
    const std::size_t width = out_shape[1];
    const std::size_t block = spec_.filters * width;
    Tensor out({batch, out_shape[0], width});
    records_.clear();
    records_.reserve(batch * channels_);
    for (std::size_t b = 0; b < batch; ++b) {
        const auto x = input.example(b);
        for (std::size_t c = 0; c < channels_; ++c) {
            records_.push_back(layers_[c].forward(x.subspan(c * input_length_, input_length_), ctx.phase));
            const auto& rec = records_.back();
            std::copy(rec.outputs.begin(), rec.outputs.end(), out.data() + (b * channels_ + c) * block);
        }
    }
    return out;
}

Tensor FrontBlock::backward(const Tensor& grad_output) {
    const std::size_t batch = grad_output.batch();
    const std::size_t block = grad_output.per_example() / channels_;
    Tensor dx({batch, channels_, input_length_});
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t c = 0; c < channels_; ++c) {
            const std::size_t k = b * channels_ + c;
            const std::span<const double> upstream(grad_output.data() + k * block, block);
            const auto g = layers_[c].backward(records_[k], upstream);
            for (std::size_t i = 0; i < g.filters.size(); ++i) grad_filters_[c][i] += g.filters[i];
            for (std::size_t i = 0; i < g.bias.size(); ++i) grad_bias_[c][i] += g.bias[i];
            std::copy(g.input.begin(), g.input.end(), dx.data() + k * input_length_);
        }
    return dx;
}

std::vector<ParameterRef> FrontBlock::parameters() {
    std::vector<ParameterRef> out;
    for (std::size_t c = 0; c < channels_; ++c) {
        const std::string prefix = name_ + ".c" + std::to_string(c);
        out.push_back({prefix + ".weight", {spec_.filters, spec_.size}, layers_[c].filters(), grad_filters_[c]});
        out.push_back({prefix + ".bias", {spec_.filters}, layers_[c].bias(), grad_bias_[c]});
    }
    return out;
}

void FrontBlock::initialize(std::mt19937_64& rng) {
    for (auto& layer : layers_) {
        glorot_uniform(layer.filters(), spec_.size, spec_.filters * spec_.size, rng);
        std::fill(layer.bias().begin(), layer.bias().end(), 0.0);
    }
}

}  // namespace warpconv::nn
