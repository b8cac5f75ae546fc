#include "warpconv/dtw_layer.hpp"

#include <algorithm>
#include <string>

#include "warpconv/warp_solver.hpp"

namespace warpconv {

namespace {

std::string normalized_key(std::string_view text) {
    std::string key(text);
    std::replace(key.begin(), key.end(), '_', '-');
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return key;
}

double activate(Activation act, double v) {
    return act == Activation::ReLU ? (v > 0.0 ? v : 0.0) : v;
}

double activation_slope(Activation act, double pre) {
    return act == Activation::ReLU ? (pre > 0.0 ? 1.0 : 0.0) : 1.0;
}

}  // namespace

std::string_view to_string(ApplyMode mode) {
    switch (mode) {
    case ApplyMode::Both: return "both";
    case ApplyMode::TrainOnly: return "train-only";
    case ApplyMode::InferOnly: return "infer-only";
    case ApplyMode::Never: return "never";
    }
    return "unknown";
}

std::string_view to_string(Activation act) { return act == Activation::ReLU ? "relu" : "identity"; }

ApplyMode parse_apply_mode(std::string_view text) {
    const auto key = normalized_key(text);
    if (key == "both") return ApplyMode::Both;
    if (key == "train-only") return ApplyMode::TrainOnly;
    if (key == "infer-only") return ApplyMode::InferOnly;
    if (key == "never") return ApplyMode::Never;
    throw std::invalid_argument("unknown apply mode '" + std::string(text) + "'");
}

Activation parse_activation(std::string_view text) {
    const auto key = normalized_key(text);
    if (key == "relu") return Activation::ReLU;
    if (key == "identity") return Activation::Identity;
    throw std::invalid_argument("unknown activation '" + std::string(text) + "'");
}

bool warps_in(ApplyMode mode, Phase phase) {
    switch (mode) {
    case ApplyMode::Both: return true;
    case ApplyMode::TrainOnly: return phase == Phase::Train;
    case ApplyMode::InferOnly: return phase == Phase::Infer;
    case ApplyMode::Never: return false;
    }
    return false;
}

std::size_t output_width(std::size_t input_length, std::size_t window, std::size_t stride) {
    if (window == 0 || stride == 0) throw std::invalid_argument("window and stride must be >= 1");
    if (input_length < window)
        throw std::invalid_argument("input length " + std::to_string(input_length) + " shorter than window " +
                                    std::to_string(window));
    return (input_length - window) / stride + 1;
}

std::vector<std::span<const double>> extract_windows(std::span<const double> x, std::size_t window,
                                                     std::size_t stride) {
    const std::size_t count = output_width(x.size(), window, stride);
    std::vector<std::span<const double>> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.push_back(x.subspan(k * stride, window));
    return out;
}

AlignmentMatrix LayerForwardRecord::u_star(std::size_t f, std::size_t t) const {
    if (!warped) return AlignmentMatrix(WarpPath::diagonal(window), NormalizationMode::XOntoW);
    return AlignmentMatrix(paths[f * width + t], mode);
}

DtwConvLayer::DtwConvLayer(DtwConvSpec spec)
    : DtwConvLayer(spec, std::vector<double>(spec.filters * spec.size, 0.0), std::vector<double>(spec.filters, 0.0)) {}

DtwConvLayer::DtwConvLayer(DtwConvSpec spec, std::vector<double> filters, std::vector<double> bias)
    : spec_(spec), filters_(std::move(filters)), bias_(std::move(bias)) {
    if (spec_.filters == 0 || spec_.size == 0 || spec_.stride == 0)
        throw std::invalid_argument("DtwConvLayer: filters, size and stride must be >= 1");
    if (filters_.size() != spec_.filters * spec_.size)
        throw std::invalid_argument("DtwConvLayer: filter storage does not match filters x size");
    if (bias_.size() != spec_.filters) throw std::invalid_argument("DtwConvLayer: bias size does not match filters");
}

LayerForwardRecord DtwConvLayer::forward(std::span<const double> x, Phase phase) const {
    const std::size_t n = spec_.size;
    const auto windows = extract_windows(x, n, spec_.stride);

    LayerForwardRecord rec;
    rec.filters = spec_.filters;
    rec.width = windows.size();
    rec.window = n;
    rec.stride = spec_.stride;
    rec.input_length = x.size();
    rec.warped = warps_in(spec_.apply_mode, phase);
    rec.mode = spec_.mode;
    rec.outputs.resize(rec.filters * rec.width);
    rec.pre_activations.resize(rec.filters * rec.width);
    rec.warped_inputs.resize(rec.filters * rec.width * n);
    if (rec.warped) rec.paths.reserve(rec.filters * rec.width);

    for (std::size_t f = 0; f < spec_.filters; ++f) {
        const auto w = filter(f);
        for (std::size_t t = 0; t < rec.width; ++t) {
            const auto xt = windows[t];
            double* v = rec.warped_inputs.data() + (f * rec.width + t) * n;
            if (rec.warped) {
                auto sol = solve_path(product_matrix(w, xt), spec_.mode, spec_.band);
                const auto weights = cell_weights(sol.optimal_path, spec_.mode);
                std::fill(v, v + n, 0.0);
                const auto& cells = sol.optimal_path.cells();
                for (std::size_t k = 0; k < cells.size(); ++k) v[cells[k].row] += weights[k] * xt[cells[k].col];
                rec.paths.push_back(std::move(sol.optimal_path));
            } else {
                std::copy(xt.begin(), xt.end(), v);
            }
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += w[i] * v[i];
            const double pre = acc + bias_[f];
            rec.pre_activations[f * rec.width + t] = pre;
            rec.outputs[f * rec.width + t] = activate(spec_.activation, pre);
        }
    }
    return rec;
}

LayerGradients DtwConvLayer::backward(const LayerForwardRecord& rec, std::span<const double> upstream) const {
    const std::size_t n = spec_.size;
    if (rec.filters != spec_.filters || rec.window != n || rec.stride != spec_.stride)
        throw std::invalid_argument("DtwConvLayer::backward: record does not match layer");
    if (upstream.size() != rec.filters * rec.width)
        throw std::invalid_argument("DtwConvLayer::backward: upstream has " + std::to_string(upstream.size()) +
                                    " entries, expected " + std::to_string(rec.filters * rec.width));

    LayerGradients g;
    g.filters.assign(spec_.filters * n, 0.0);
    g.bias.assign(spec_.filters, 0.0);
    g.input.assign(rec.input_length, 0.0);

    for (std::size_t f = 0; f < spec_.filters; ++f) {
        const auto w = filter(f);
        for (std::size_t t = 0; t < rec.width; ++t) {
            const std::size_t idx = f * rec.width + t;
            const double delta = upstream[idx] * activation_slope(spec_.activation, rec.pre_activations[idx]);
            if (delta == 0.0) continue;
            g.bias[f] += delta;
            const auto v = rec.warped_input(f, t);
            for (std::size_t i = 0; i < n; ++i) g.filters[f * n + i] += delta * v[i];
            double* dx = g.input.data() + t * rec.stride;
            if (rec.warped) {
                // d/dx_j of w U x' is (w U)_j.
                const WarpPath& path = rec.paths[idx];
                const auto weights = cell_weights(path, rec.mode);
                for (std::size_t k = 0; k < path.size(); ++k)
                    dx[path[k].col] += delta * w[path[k].row] * weights[k];
            } else {
                for (std::size_t j = 0; j < n; ++j) dx[j] += delta * w[j];
            }
        }
    }
    return g;
}

MultiChannelRecord multichannel_forward(std::span<const DtwConvLayer> layers, std::span<const double> x,
                                        std::size_t channels, Phase phase) {
    if (layers.size() != channels)
        throw std::invalid_argument("multichannel_forward: " + std::to_string(layers.size()) + " layers for " +
                                    std::to_string(channels) + " channels");
    if (channels == 0 || x.size() % channels != 0)
        throw std::invalid_argument("multichannel_forward: input size not divisible by channel count");
    const std::size_t length = x.size() / channels;

    MultiChannelRecord out;
    out.channels.reserve(channels);
    for (std::size_t c = 0; c < channels; ++c) {
        out.channels.push_back(layers[c].forward(x.subspan(c * length, length), phase));
        const auto& rec = out.channels.back();
        if (c == 0)
            out.width = rec.width;
        else if (rec.width != out.width)
            throw std::invalid_argument("multichannel_forward: channel layers produce different widths");
        out.features += rec.filters;
        out.feature_map.insert(out.feature_map.end(), rec.outputs.begin(), rec.outputs.end());
    }
    return out;
}

}  // namespace warpconv
