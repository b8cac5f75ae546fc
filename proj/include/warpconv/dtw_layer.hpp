#ifndef WARPCONV_DTW_LAYER_HPP
#define WARPCONV_DTW_LAYER_HPP

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "warpconv/warp_core.hpp"

namespace warpconv {

/// Which phases apply the optimal alignment U*. Never is plain convolution.
enum class ApplyMode { Both, TrainOnly, InferOnly, Never };
enum class Phase { Train, Infer };
enum class Activation { ReLU, Identity };

std::string_view to_string(ApplyMode mode);
std::string_view to_string(Activation act);
ApplyMode parse_apply_mode(std::string_view text);
Activation parse_activation(std::string_view text);

bool warps_in(ApplyMode mode, Phase phase);

/// Number of "valid" windows of length n at stride s over an input of length L.
std::size_t output_width(std::size_t input_length, std::size_t window, std::size_t stride);

/// Views x[t .. t+n-1] for t = 0, s, 2s, ...
std::vector<std::span<const double>> extract_windows(std::span<const double> x, std::size_t window,
                                                     std::size_t stride);

struct DtwConvSpec {
    std::size_t filters = 1;
    std::size_t size = 1;
    std::size_t stride = 1;
    BandConfig band{1};
    NormalizationMode mode = NormalizationMode::XOntoW;
    ApplyMode apply_mode = ApplyMode::Both;
    Activation activation = Activation::ReLU;
};

/// Backward-pass cache for one forward call on a single-channel input.
struct LayerForwardRecord {
    std::size_t filters = 0;
    std::size_t width = 0;
    std::size_t window = 0;
    std::size_t stride = 1;
    std::size_t input_length = 0;
    bool warped = false;
    NormalizationMode mode = NormalizationMode::XOntoW;

    std::vector<double> outputs;          // filters x width
    std::vector<double> pre_activations;  // filters x width
    std::vector<double> warped_inputs;    // filters x width x window: U* x_t' (x_t when unwarped)
    std::vector<WarpPath> paths;          // filters x width, only when warped

    double output(std::size_t f, std::size_t t) const { return outputs[f * width + t]; }
    std::span<const double> warped_input(std::size_t f, std::size_t t) const {
        return {warped_inputs.data() + (f * width + t) * window, window};
    }
    /// U* for (filter, window); identity when this pass did not warp.
    AlignmentMatrix u_star(std::size_t f, std::size_t t) const;
};

struct LayerGradients {
    std::vector<double> filters;  // filters x size
    std::vector<double> bias;     // filters
    std::vector<double> input;    // input_length
};

/*
 * 1-D convolution whose per-window response is w U* x_t' + b, where U* is
 * the alignment maximizing the normalized path cost between the filter and
 * the window inside the band. Weights are shared across windows; U* is
 * solved per (filter, window) and held constant for the gradient.
 */
class DtwConvLayer {
public:
    /// Zero filters and bias.
    explicit DtwConvLayer(DtwConvSpec spec);
    DtwConvLayer(DtwConvSpec spec, std::vector<double> filters, std::vector<double> bias);

    const DtwConvSpec& spec() const { return spec_; }

    std::span<double> filters() { return filters_; }
    std::span<const double> filters() const { return filters_; }
    std::span<const double> filter(std::size_t f) const { return {filters_.data() + f * spec_.size, spec_.size}; }
    std::span<double> bias() { return bias_; }
    std::span<const double> bias() const { return bias_; }

    LayerForwardRecord forward(std::span<const double> x, Phase phase) const;
    LayerGradients backward(const LayerForwardRecord& record, std::span<const double> upstream) const;

private:
    DtwConvSpec spec_;
    std::vector<double> filters_;
    std::vector<double> bias_;
};

struct MultiChannelRecord {
    std::size_t features = 0;  // channels x filters
    std::size_t width = 0;
    std::vector<double> feature_map;  // features x width, channel-major
    std::vector<LayerForwardRecord> channels;
};

/// One layer per channel; x is channels x length, row-major. Feature maps
/// are concatenated along the feature axis in channel order.
MultiChannelRecord multichannel_forward(std::span<const DtwConvLayer> layers, std::span<const double> x,
                                        std::size_t channels, Phase phase);

}  // namespace warpconv

#endif  // WARPCONV_DTW_LAYER_HPP
