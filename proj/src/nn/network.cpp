#include "warpconv/nn/network.hpp"

#include <cmath>
#include <sstream>

#include "warpconv/nn/loss.hpp"

namespace warpconv::nn {

std::string NetworkSpec::canonical() const {
    std::ostringstream s;
    s.precision(17);
    s << "input=" << channels << "x" << length << ";classes=" << classes << ";front=" << to_string(front_kind)
      << "," << front.filters << "," << front.size << "," << front.stride << ",r=" << front.band.radius
      << ",mode=" << to_string(front.mode) << ",apply=" << to_string(front.apply_mode) << ";pool="
      << (pool_kind == PoolKind::Max ? "max" : "mean") << "," << pool_size << "," << pool_stride
      << ";conv=" << conv_filters << "," << conv_size << "," << conv_stride << ";dense=" << dense1 << ","
      << dense2 << ";dropout=" << dropout << ";bn_momentum=" << bn_momentum;
    return s.str();
}

std::uint64_t NetworkSpec::hash() const {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

Network::Network(const NetworkSpec& spec) : spec_(spec) {
    if (spec.classes < 2) throw SpecError("network: classes must be >= 2");
    if (spec.length == 0) throw SpecError("network: input length must be >= 1");

    auto front = std::make_unique<FrontBlock>("front", spec.front_kind, spec.channels, spec.front);
    front_ = front.get();
    layers_.push_back(std::move(front));
    layers_.push_back(std::make_unique<Pool1D>(spec.pool_size, spec.pool_stride, spec.pool_kind));

    shapes_.push_back({spec.channels, spec.length});
    auto chain = [&](std::size_t from) {
        for (std::size_t k = from; k < layers_.size(); ++k) {
            try {
                shapes_.push_back(layers_[k]->output_shape(shapes_.back()));
            } catch (const SpecError& e) {
                throw SpecError("layer " + std::to_string(k) + " " + e.what());
            }
        }
    };
    chain(0);

    const std::size_t volume_channels = shapes_.back()[0];
    layers_.push_back(std::make_unique<Conv1D>("conv", volume_channels, spec.conv_filters, spec.conv_size,
                                               spec.conv_stride));
    layers_.push_back(std::make_unique<ReLU>());
    chain(2);

    std::size_t features = element_count(shapes_.back());
    const std::size_t hidden[] = {spec.dense1, spec.dense2};
    for (std::size_t h = 0; h < 2; ++h) {
        const std::string tag = "dense" + std::to_string(h + 1);
        const std::size_t first = layers_.size();
        layers_.push_back(std::make_unique<Dense>(tag, features, hidden[h]));
        layers_.push_back(std::make_unique<BatchNorm>("bn" + std::to_string(h + 1), hidden[h], spec.bn_momentum));
        layers_.push_back(std::make_unique<ReLU>());
        layers_.push_back(std::make_unique<Dropout>(spec.dropout));
        chain(first);
        features = hidden[h];
    }
    layers_.push_back(std::make_unique<Dense>("logits", features, spec.classes));
    chain(layers_.size() - 1);

    std::mt19937_64 rng(spec.seed);
    for (auto& layer : layers_) layer->initialize(rng);
}

Tensor Network::forward(const Tensor& input, const ForwardContext& ctx) {
    if (input.rank() != 3 || input.dim(1) != spec_.channels || input.dim(2) != spec_.length)
        throw std::invalid_argument("network: expected input [B, " + std::to_string(spec_.channels) + ", " +
                                    std::to_string(spec_.length) + "], got " + shape_string(input.shape()));
    Tensor h = layers_.front()->forward(input, ctx);
    for (std::size_t k = 1; k < layers_.size(); ++k) h = layers_[k]->forward(h, ctx);
    return h;
}

void Network::backward(const Tensor& grad_logits) {
    Tensor g = grad_logits;
    for (std::size_t k = layers_.size(); k-- > 0;) g = layers_[k]->backward(g);
}

std::vector<ParameterRef> Network::parameters() {
    std::vector<ParameterRef> out;
    for (auto& layer : layers_)
        for (auto& p : layer->parameters()) out.push_back(std::move(p));
    return out;
}

std::vector<ParameterRef> Network::buffers() {
    std::vector<ParameterRef> out;
    for (auto& layer : layers_)
        for (auto& p : layer->buffers()) out.push_back(std::move(p));
    return out;
}

std::size_t Network::parameter_count() {
    std::size_t n = 0;
    for (const auto& p : parameters()) n += p.value.size();
    return n;
}

void Network::zero_grad() {
    for (auto& p : parameters()) std::fill(p.grad.begin(), p.grad.end(), 0.0);
}

double train_step(Network& net, const Tensor& inputs, std::span<const std::size_t> labels, const AdamConfig& config,
                  AdamState& state, std::mt19937_64& rng, std::vector<std::size_t>* predictions) {
    net.zero_grad();
    const Tensor logits = net.forward(inputs, ForwardContext{Phase::Train, &rng});
    const auto loss = softmax_cross_entropy(logits, labels);
    if (!std::isfinite(loss.loss))
        throw NumericError("training loss is not finite (" + std::to_string(loss.loss) +
                           "); check the learning rate and the input data");
    if (predictions) *predictions = argmax_rows(logits);
    net.backward(loss.grad);
    const auto params = net.parameters();
    if (state.first.empty() && state.step == 0) state = make_adam_state(params);
    adam_step(config, state, params);
    return loss.loss;
}

Evaluation evaluate(Network& net, const Tensor& inputs, std::span<const std::size_t> labels, std::size_t batch_size) {
    const std::size_t total = inputs.batch();
    if (total == 0) throw std::invalid_argument("evaluate: empty dataset");
    if (labels.size() != total) throw std::invalid_argument("evaluate: label count does not match inputs");
    if (batch_size == 0) batch_size = total;
    const std::size_t per = inputs.per_example();
    Shape shape = inputs.shape();
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < total; start += batch_size) {
        const std::size_t count = std::min(batch_size, total - start);
        shape[0] = count;
        Tensor chunk(shape, std::vector<double>(inputs.data() + start * per, inputs.data() + (start + count) * per));
        const Tensor logits = net.forward(chunk, ForwardContext{Phase::Infer, nullptr});
        const auto slice = labels.subspan(start, count);
        loss_sum += softmax_cross_entropy(logits, slice).loss * static_cast<double>(count);
        const auto pred = argmax_rows(logits);
        for (std::size_t k = 0; k < count; ++k) correct += pred[k] == slice[k] ? 1 : 0;
    }
    return {loss_sum / static_cast<double>(total), static_cast<double>(correct) / static_cast<double>(total)};
}

}  // namespace warpconv::nn
