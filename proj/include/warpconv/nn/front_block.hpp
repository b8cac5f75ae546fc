#ifndef WARPCONV_NN_FRONT_BLOCK_HPP
#define WARPCONV_NN_FRONT_BLOCK_HPP

#include <string_view>

#include "warpconv/dtw_layer.hpp"
#include "warpconv/nn/layers.hpp"

namespace warpconv::nn {

enum class FrontKind { Dtw, Standard };

std::string_view to_string(FrontKind kind);
FrontKind parse_front_kind(std::string_view text);

/*
 * Per-channel convolution front end over [B, C, L]. Every channel owns its own
 * filter bank (F filters of size N) followed by ReLU; the feature maps are
 * stacked into [B, C*F, W] in channel order. The standard kind is the same
 * block with warping disabled, so both kinds carry identical parameter counts.
 */
class FrontBlock : public Layer {
public:
    FrontBlock(std::string name, FrontKind kind, std::size_t channels, DtwConvSpec spec);

    std::string describe() const override;
    Shape output_shape(const Shape& input) const override;
    Tensor forward(const Tensor& input, const ForwardContext& ctx) override;
    Tensor backward(const Tensor& grad_output) override;
    std::vector<ParameterRef> parameters() override;
    void initialize(std::mt19937_64& rng) override;

    FrontKind kind() const { return kind_; }
    std::span<const DtwConvLayer> channel_layers() const { return layers_; }
    std::span<DtwConvLayer> channel_layers() { return layers_; }
    /// Records of the most recent forward pass, indexed [example * C + channel].
    const std::vector<LayerForwardRecord>& last_records() const { return records_; }

private:
    std::string name_;
    FrontKind kind_;
    std::size_t channels_;
    DtwConvSpec spec_;
    std::vector<DtwConvLayer> layers_;
    std::vector<std::vector<double>> grad_filters_, grad_bias_;
    std::vector<LayerForwardRecord> records_;
    std::size_t input_length_ = 0;
};

}  // namespace warpconv::nn

#endif
