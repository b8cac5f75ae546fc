#include <doctest.h>

#include <array>
#include <random>

#include "test_support.hpp"
#include "warpconv/dtw_layer.hpp"
#include "warpconv/warp_solver.hpp"

using namespace warpconv;

namespace {

DtwConvLayer random_layer(std::mt19937_64& rng, DtwConvSpec spec) {
    return DtwConvLayer(spec, testing::normal_vector(rng, spec.filters * spec.size),
                        testing::normal_vector(rng, spec.filters, 0.5));
}

// Plain valid cross-correlation written independently of the layer.
std::vector<double> reference_conv(const DtwConvLayer& layer, std::span<const double> x) {
    const auto& s = layer.spec();
    const std::size_t width = (x.size() - s.size) / s.stride + 1;
    std::vector<double> out(s.filters * width);
    for (std::size_t f = 0; f < s.filters; ++f)
        for (std::size_t t = 0; t < width; ++t) {
            double acc = 0.0;
            for (std::size_t i = 0; i < s.size; ++i) acc += layer.filter(f)[i] * x[t * s.stride + i];
            const double pre = acc + layer.bias()[f];
            out[f * width + t] = s.activation == Activation::ReLU ? std::max(pre, 0.0) : pre;
        }
    return out;
}

double sum_outputs(const DtwConvLayer& layer, std::span<const double> x, Phase phase) {
    const auto rec = layer.forward(x, phase);
    double s = 0.0;
    for (double v : rec.outputs) s += v;
    return s;
}

// True when the selected paths and ReLU signs coincide between two passes.
bool same_branches(const LayerForwardRecord& a, const LayerForwardRecord& b) {
    if (a.paths != b.paths) return false;
    for (std::size_t k = 0; k < a.pre_activations.size(); ++k)
        if ((a.pre_activations[k] > 0.0) != (b.pre_activations[k] > 0.0)) return false;
    return true;
}

// A parameter point is tie-free when no +-h coordinate perturbation flips a
// branch: path choice or ReLU sign.
bool tie_free(DtwConvLayer& layer, std::vector<double>& x, double h) {
    const auto base = layer.forward(x, Phase::Train);
    auto probe = [&](std::span<double> params) {
        for (auto& p : params) {
            const double keep = p;
            for (double delta : {h, -h}) {
                p = keep + delta;
                if (!same_branches(base, layer.forward(x, Phase::Train))) {
                    p = keep;
                    return false;
                }
            }
            p = keep;
        }
        return true;
    };
    return probe(layer.filters()) && probe(layer.bias()) && probe(x);
}

}  // namespace

TEST_CASE("window extraction") {
    const std::vector<double> x{0, 1, 2, 3, 4};
    auto w = extract_windows(x, 3, 1);
    REQUIRE(w.size() == 3);
    CHECK(w[2][0] == 2);
    w = extract_windows(x, 3, 2);
    REQUIRE(w.size() == 2);
    CHECK(w[1][0] == 2);
    CHECK(extract_windows(std::span<const double>(x).first(3), 3, 7).size() == 1);
    CHECK_THROWS_AS(extract_windows(std::span<const double>(x).first(2), 3, 1), std::invalid_argument);
}

TEST_CASE("apply mode phase table") {
    CHECK(warps_in(ApplyMode::Both, Phase::Train));
    CHECK(warps_in(ApplyMode::Both, Phase::Infer));
    CHECK(warps_in(ApplyMode::TrainOnly, Phase::Train));
    CHECK_FALSE(warps_in(ApplyMode::TrainOnly, Phase::Infer));
    CHECK_FALSE(warps_in(ApplyMode::InferOnly, Phase::Train));
    CHECK(warps_in(ApplyMode::InferOnly, Phase::Infer));
    CHECK_FALSE(warps_in(ApplyMode::Never, Phase::Train));
    CHECK_FALSE(warps_in(ApplyMode::Never, Phase::Infer));
}

TEST_CASE("warped response on the two-cell example") {
    DtwConvSpec spec;
    spec.filters = 1;
    spec.size = 2;
    spec.band = BandConfig{1};
    spec.mode = NormalizationMode::XOntoW;
    spec.activation = Activation::Identity;
    DtwConvLayer layer(spec, {1, 0}, {0});
    const std::vector<double> x{0, 1};
    const auto warped = layer.forward(x, Phase::Train);
    CHECK(warped.outputs[0] == 0.5);
    CHECK(warped.paths[0] == WarpPath(2, {{0, 0}, {0, 1}, {1, 1}}));
    spec.apply_mode = ApplyMode::Never;
    DtwConvLayer plain(spec, {1, 0}, {0});
    CHECK(plain.forward(x, Phase::Train).outputs[0] == 0.0);
}

TEST_CASE("degenerate configurations equal standard convolution bit for bit") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        DtwConvSpec spec;
        spec.filters = 1 + trial % 4;
        spec.size = 1 + trial % 7;
        spec.stride = 1 + trial % 3;
        spec.activation = trial % 2 ? Activation::ReLU : Activation::Identity;
        const auto x = testing::normal_vector(rng, spec.size + 11);

        spec.apply_mode = ApplyMode::Never;
        spec.band = BandConfig{3};
        const auto never = random_layer(rng, spec);
        const auto reference = reference_conv(never, x);
        for (auto phase : {Phase::Train, Phase::Infer}) CHECK(never.forward(x, phase).outputs == reference);

        spec.apply_mode = ApplyMode::Both;
        spec.band = BandConfig{0};
        for (auto mode : {NormalizationMode::XOntoW, NormalizationMode::WOntoX}) {
            spec.mode = mode;
            DtwConvLayer banded(spec, std::vector<double>(never.filters().begin(), never.filters().end()),
                                std::vector<double>(never.bias().begin(), never.bias().end()));
            CHECK(banded.forward(x, Phase::Train).outputs == reference);
        }

        // Symmetric on the diagonal divides by N.
        spec.mode = NormalizationMode::Symmetric;
        std::vector<double> scaled(never.filters().begin(), never.filters().end());
        for (auto& v : scaled) v /= static_cast<double>(spec.size);
        DtwConvLayer sym(spec, std::vector<double>(never.filters().begin(), never.filters().end()),
                         std::vector<double>(never.bias().begin(), never.bias().end()));
        DtwConvLayer shrunk(DtwConvSpec{spec.filters, spec.size, spec.stride, BandConfig{0},
                                        NormalizationMode::XOntoW, ApplyMode::Never, spec.activation},
                            scaled, std::vector<double>(never.bias().begin(), never.bias().end()));
        const auto a = sym.forward(x, Phase::Train).outputs;
        const auto b = shrunk.forward(x, Phase::Train).outputs;
        for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
    }
}

TEST_CASE("apply modes select the phase") {
    std::mt19937_64 rng(23);
    DtwConvSpec spec{3, 4, 1, BandConfig{1}, NormalizationMode::XOntoW, ApplyMode::TrainOnly, Activation::Identity};
    auto layer = random_layer(rng, spec);
    const auto x = testing::normal_vector(rng, 12);
    DtwConvSpec plain_spec = spec;
    plain_spec.apply_mode = ApplyMode::Never;
    DtwConvLayer plain(plain_spec, std::vector<double>(layer.filters().begin(), layer.filters().end()),
                       std::vector<double>(layer.bias().begin(), layer.bias().end()));
    DtwConvSpec both_spec = spec;
    both_spec.apply_mode = ApplyMode::Both;
    DtwConvLayer both(both_spec, std::vector<double>(layer.filters().begin(), layer.filters().end()),
                      std::vector<double>(layer.bias().begin(), layer.bias().end()));

    CHECK(layer.forward(x, Phase::Infer).outputs == plain.forward(x, Phase::Infer).outputs);
    CHECK(layer.forward(x, Phase::Train).outputs == both.forward(x, Phase::Train).outputs);
    CHECK(layer.forward(x, Phase::Train).warped);
    CHECK_FALSE(layer.forward(x, Phase::Infer).warped);
    CHECK(layer.forward(x, Phase::Infer).paths.empty());
}

TEST_CASE("warped pre-activation dominates the unwarped one") {
    std::mt19937_64 rng(29);
    for (auto mode : {NormalizationMode::XOntoW, NormalizationMode::WOntoX, NormalizationMode::Symmetric}) {
        DtwConvSpec spec{4, 5, 1, BandConfig{2}, mode, ApplyMode::Both, Activation::Identity};
        const auto layer = random_layer(rng, spec);
        const auto x = testing::normal_vector(rng, 20);
        const auto rec = layer.forward(x, Phase::Train);
        for (std::size_t f = 0; f < spec.filters; ++f)
            for (std::size_t t = 0; t < rec.width; ++t) {
                double dot = 0.0;
                for (std::size_t i = 0; i < spec.size; ++i) dot += layer.filter(f)[i] * x[t + i];
                if (mode == NormalizationMode::Symmetric) dot /= static_cast<double>(spec.size);
                const double pre = rec.pre_activations[f * rec.width + t] - layer.bias()[f];
                CHECK(pre >= dot - 1e-12);
                const auto u = rec.u_star(f, t);
                CHECK(u.bilinear(layer.filter(f), std::span<const double>(x).subspan(t, spec.size)) ==
                      doctest::Approx(pre).epsilon(1e-12));
            }
    }
}

TEST_CASE("forward is deterministic") {
    std::mt19937_64 rng(31);
    DtwConvSpec spec{3, 6, 2, BandConfig{2}, NormalizationMode::Symmetric, ApplyMode::Both, Activation::ReLU};
    const auto layer = random_layer(rng, spec);
    const auto x = testing::normal_vector(rng, 30);
    const auto a = layer.forward(x, Phase::Train);
    const auto b = layer.forward(x, Phase::Train);
    CHECK(a.outputs == b.outputs);
    CHECK(a.paths == b.paths);
}

TEST_CASE("zero filters produce the bias") {
    DtwConvSpec spec{2, 3, 1, BandConfig{1}, NormalizationMode::XOntoW, ApplyMode::Both, Activation::Identity};
    DtwConvLayer layer(spec, std::vector<double>(6, 0.0), {0.25, -1.0});
    const std::vector<double> x{1, 2, 3};
    const auto rec = layer.forward(x, Phase::Train);
    CHECK(rec.outputs == std::vector<double>{0.25, -1.0});
    const auto g = layer.backward(rec, std::vector<double>{1.0, 2.0});
    CHECK(g.bias == std::vector<double>{1.0, 2.0});
    CHECK(g.input == std::vector<double>{0, 0, 0});
}

TEST_CASE("single window bias gradient equals upstream") {
    std::mt19937_64 rng(37);
    DtwConvSpec spec{1, 4, 1, BandConfig{1}, NormalizationMode::WOntoX, ApplyMode::Both, Activation::Identity};
    const auto layer = random_layer(rng, spec);
    const auto x = testing::normal_vector(rng, 4);
    const auto rec = layer.forward(x, Phase::Train);
    REQUIRE(rec.width == 1);
    CHECK(layer.backward(rec, std::vector<double>{0.75}).bias[0] == 0.75);
}

TEST_CASE("never mode gradients equal standard convolution gradients") {
    std::mt19937_64 rng(41);
    DtwConvSpec spec{2, 3, 2, BandConfig{1}, NormalizationMode::XOntoW, ApplyMode::Never, Activation::Identity};
    const auto layer = random_layer(rng, spec);
    const auto x = testing::normal_vector(rng, 9);
    const auto rec = layer.forward(x, Phase::Train);
    const auto up = testing::normal_vector(rng, rec.outputs.size());
    const auto g = layer.backward(rec, up);
    std::vector<double> gw(6, 0.0), gx(9, 0.0);
    for (std::size_t f = 0; f < 2; ++f)
        for (std::size_t t = 0; t < rec.width; ++t)
            for (std::size_t i = 0; i < 3; ++i) {
                gw[f * 3 + i] += up[f * rec.width + t] * x[t * 2 + i];
                gx[t * 2 + i] += up[f * rec.width + t] * layer.filter(f)[i];
            }
    for (std::size_t k = 0; k < gw.size(); ++k) CHECK(g.filters[k] == doctest::Approx(gw[k]).epsilon(1e-14));
    for (std::size_t k = 0; k < gx.size(); ++k) CHECK(g.input[k] == doctest::Approx(gx[k]).epsilon(1e-14));
}

TEST_CASE("analytic gradients match central differences") {
    std::mt19937_64 rng(43);
    const double h = 1e-5;
    int checked = 0;
    for (int config = 0; config < 20; ++config) {
        DtwConvSpec spec;
        spec.filters = 2;
        spec.size = 3 + static_cast<std::size_t>(config % 4);
        spec.stride = 1 + static_cast<std::size_t>(config % 2);
        spec.band = BandConfig{1 + static_cast<std::size_t>(config % 2)};
        spec.mode = std::array{NormalizationMode::Symmetric, NormalizationMode::XOntoW,
                               NormalizationMode::WOntoX}[config % 3];
        spec.activation = config % 2 ? Activation::ReLU : Activation::Identity;
        for (int attempt = 0; attempt < 50; ++attempt) {
            auto layer = random_layer(rng, spec);
            auto x = testing::normal_vector(rng, spec.size + 5);
            if (!tie_free(layer, x, h)) continue;
            const auto rec = layer.forward(x, Phase::Train);
            const auto g = layer.backward(rec, std::vector<double>(rec.outputs.size(), 1.0));
            auto loss = [&] { return sum_outputs(layer, x, Phase::Train); };

            std::vector<double> w(layer.filters().begin(), layer.filters().end());
            auto fd_w = testing::central_differences(w, [&] {
                std::copy(w.begin(), w.end(), layer.filters().begin());
                return loss();
            }, h);
            std::copy(w.begin(), w.end(), layer.filters().begin());
            std::vector<double> b(layer.bias().begin(), layer.bias().end());
            auto fd_b = testing::central_differences(b, [&] {
                std::copy(b.begin(), b.end(), layer.bias().begin());
                return loss();
            }, h);
            std::copy(b.begin(), b.end(), layer.bias().begin());
            auto fd_x = testing::central_differences(x, loss, h);

            INFO("config " << config);
            CHECK(testing::relative_error(g.filters, fd_w) <= 1e-4);
            CHECK(testing::relative_error(g.bias, fd_b) <= 1e-4);
            CHECK(testing::relative_error(g.input, fd_x) <= 1e-4);
            ++checked;
            break;
        }
    }
    CHECK(checked == 20);
}

TEST_CASE("backward rejects mismatched records") {
    DtwConvSpec spec{2, 3, 1, BandConfig{1}, NormalizationMode::XOntoW, ApplyMode::Both, Activation::ReLU};
    DtwConvLayer layer(spec);
    const auto rec = layer.forward(std::vector<double>{1, 2, 3, 4}, Phase::Train);
    CHECK_THROWS_AS(layer.backward(rec, std::vector<double>(3, 1.0)), std::invalid_argument);
    DtwConvLayer other(DtwConvSpec{2, 2, 1, BandConfig{1}, NormalizationMode::XOntoW, ApplyMode::Both,
                                   Activation::ReLU});
    CHECK_THROWS_AS(other.backward(rec, std::vector<double>(4, 1.0)), std::invalid_argument);
}

TEST_CASE("multichannel forward") {
    std::mt19937_64 rng(47);
    DtwConvSpec spec{8, 7, 1, BandConfig{1}, NormalizationMode::Symmetric, ApplyMode::Both, Activation::ReLU};
    std::vector<DtwConvLayer> layers;
    for (int c = 0; c < 6; ++c) layers.push_back(random_layer(rng, spec));
    const auto x = testing::normal_vector(rng, 6 * 36);
    const auto out = multichannel_forward(layers, x, 6, Phase::Train);
    CHECK(out.features == 48);
    CHECK(out.width == 30);
    CHECK(out.feature_map.size() == 48 * 30);

    // One channel reduces to forward.
    const auto single = multichannel_forward(std::span<const DtwConvLayer>(layers).first(1),
                                             std::span<const double>(x).first(36), 1, Phase::Train);
    CHECK(single.feature_map == layers[0].forward(std::span<const double>(x).first(36), Phase::Train).outputs);

    // Identical channels through identical layers duplicate the block.
    std::vector<DtwConvLayer> twins{layers[0], layers[0]};
    std::vector<double> dup(x.begin(), x.begin() + 36);
    dup.insert(dup.end(), x.begin(), x.begin() + 36);
    const auto pair = multichannel_forward(twins, dup, 2, Phase::Train);
    CHECK(std::equal(pair.feature_map.begin(), pair.feature_map.begin() + 240, pair.feature_map.begin() + 240));

    CHECK_THROWS_AS(multichannel_forward(twins, dup, 3, Phase::Train), std::invalid_argument);
}
