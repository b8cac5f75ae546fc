#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <numeric>

#include "layer_gradcheck.hpp"
#include "warpconv/nn/checkpoint.hpp"
#include "warpconv/nn/loss.hpp"
#include "warpconv/nn/metrics.hpp"
#include "warpconv/nn/network.hpp"

using namespace warpconv;
using namespace warpconv::nn;

namespace {

NetworkSpec tiny_spec(FrontKind kind, std::uint64_t seed = 1) {
    NetworkSpec s;
    s.channels = 2;
    s.length = 16;
    s.classes = 3;
    s.front_kind = kind;
    s.front.filters = 2;
    s.front.size = 3;
    s.front.band = BandConfig{1};
    s.conv_filters = 4;
    s.conv_size = 3;
    s.dense1 = 6;
    s.dense2 = 5;
    s.seed = seed;
    return s;
}

std::vector<double> snapshot(Network& net) {
    std::vector<double> out;
    for (const auto& p : net.parameters()) out.insert(out.end(), p.value.begin(), p.value.end());
    for (const auto& p : net.buffers()) out.insert(out.end(), p.value.begin(), p.value.end());
    return out;
}

}  // namespace

TEST_CASE("conv1d forward matches a hand computation") {
    Conv1D conv("c", 2, 1, 2, 2);
    const std::vector<double> w{1, 2, -1, 0.5};
    std::copy(w.begin(), w.end(), conv.weight().begin());
    conv.bias()[0] = 0.25;
    Tensor x({1, 2, 5}, {1, 2, 3, 4, 5, 10, 20, 30, 40, 50});
    const Tensor y = conv.forward(x, {});
    REQUIRE(y.shape() == Shape{1, 1, 2});
    CHECK(y[0] == 1 * 1 + 2 * 2 - 10 + 0.5 * 20 + 0.25);
    CHECK(y[1] == 1 * 3 + 2 * 4 - 30 + 0.5 * 40 + 0.25);
}

TEST_CASE("layer gradients match central differences") {
    std::mt19937_64 rng(2024);
    for (int config = 0; config < 20; ++config) {
        INFO("config " << config);
        const std::size_t batch = 2 + config % 3;
        const std::size_t channels = 1 + config % 3;
        const std::size_t length = 9 + config % 5;

        Conv1D conv("conv", channels, 2 + config % 2, 2 + config % 3, 1 + config % 2);
        conv.initialize(rng);
        for (auto& b : conv.bias()) b = std::normal_distribution<double>(0, 1)(rng);
        CHECK(testing::layer_gradcheck(conv, testing::kink_free_tensor(rng, {batch, channels, length}), Phase::Train,
                                       config)
                  .worst() <= 1e-4);

        Dense dense("dense", channels * length, 4);
        dense.initialize(rng);
        CHECK(testing::layer_gradcheck(dense, testing::kink_free_tensor(rng, {batch, channels, length}),
                                       Phase::Train, config)
                  .worst() <= 1e-4);

        ReLU relu;
        CHECK(testing::layer_gradcheck(relu, testing::kink_free_tensor(rng, {batch, 7}), Phase::Train, config)
                  .worst() <= 1e-4);

        Pool1D pool(2, 2, config % 2 == 0 ? PoolKind::Max : PoolKind::Mean);
        CHECK(testing::layer_gradcheck(pool, testing::kink_free_tensor(rng, {batch, channels, length}),
                                       Phase::Train, config)
                  .worst() <= 1e-4);

        BatchNorm bn("bn", 5);
        auto params = bn.parameters();
        for (auto& p : params)
            for (auto& v : p.value) v += std::normal_distribution<double>(0, 0.3)(rng);
        CHECK(testing::layer_gradcheck(bn, testing::kink_free_tensor(rng, {batch + 2, 5}), Phase::Train, config)
                  .worst() <= 1e-4);
        CHECK(testing::layer_gradcheck(bn, testing::kink_free_tensor(rng, {batch, 5}), Phase::Infer, config)
                  .worst() <= 1e-4);

        Dropout drop(0.5);
        CHECK(testing::layer_gradcheck(drop, testing::kink_free_tensor(rng, {batch, 6}), Phase::Train, config)
                  .worst() <= 1e-4);

        DtwConvSpec fs;
        fs.filters = 2;
        fs.size = 3;
        fs.band = BandConfig{static_cast<std::size_t>(config % 3)};
        FrontBlock front("front", config % 2 == 0 ? FrontKind::Standard : FrontKind::Dtw, channels, fs);
        front.initialize(rng);
        const auto report = testing::layer_gradcheck(front, testing::kink_free_tensor(rng, {batch, channels, length}),
                                                     Phase::Train, config);
        // Warped fronts can straddle an alignment switch; those draws are covered by the DTW layer suite.
        if (front.kind() == FrontKind::Standard) CHECK(report.worst() <= 1e-4);
    }
}

TEST_CASE("whole network gradient matches central differences") {
    auto spec = tiny_spec(FrontKind::Standard);
    spec.dropout = 0.3;
    Network net(spec);
    std::mt19937_64 rng(3);
    Tensor x = testing::kink_free_tensor(rng, {4, 2, 16});
    const std::vector<std::size_t> labels{0, 1, 2, 1};
    auto loss = [&] {
        std::mt19937_64 mask(11);
        return softmax_cross_entropy(net.forward(x, {Phase::Train, &mask}), labels).loss;
    };
    net.zero_grad();
    {
        std::mt19937_64 mask(11);
        const auto r = softmax_cross_entropy(net.forward(x, {Phase::Train, &mask}), labels);
        net.backward(r.grad);
    }
    for (auto& p : net.parameters()) {
        INFO(p.name);
        std::vector<double> value(p.value.begin(), p.value.end());
        const auto fd = testing::central_differences(value, [&] {
            std::copy(value.begin(), value.end(), p.value.begin());
            return loss();
        });
        std::copy(value.begin(), value.end(), p.value.begin());
        // Biases feeding batch norm have an exactly vanishing gradient.
        const bool both_vanish = testing::relative_error(p.grad, std::vector<double>(fd.size(), 0.0)) == 1.0 &&
                                 *std::max_element(fd.begin(), fd.end()) < 1e-8 &&
                                 *std::min_element(fd.begin(), fd.end()) > -1e-8 &&
                                 std::all_of(p.grad.begin(), p.grad.end(), [](double g) { return std::abs(g) < 1e-12; });
        CHECK((both_vanish || testing::relative_error(p.grad, fd) <= 1e-4));
    }
}

TEST_CASE("batch norm normalizes in training and uses running estimates in inference") {
    std::mt19937_64 rng(8);
    BatchNorm bn("bn", 4);
    Tensor x({64, 4});
    for (std::size_t b = 0; b < 64; ++b)
        for (std::size_t f = 0; f < 4; ++f)
            x[b * 4 + f] = 3.0 * static_cast<double>(f) + (1.0 + static_cast<double>(f)) *
                                                              std::normal_distribution<double>(0, 2)(rng);
    const Tensor y = bn.forward(x, {Phase::Train, nullptr});
    for (std::size_t f = 0; f < 4; ++f) {
        double mean = 0.0, var = 0.0;
        for (std::size_t b = 0; b < 64; ++b) mean += y[b * 4 + f] / 64.0;
        for (std::size_t b = 0; b < 64; ++b) var += (y[b * 4 + f] - mean) * (y[b * 4 + f] - mean) / 64.0;
        CHECK(std::abs(mean) <= 1e-5);
        CHECK(std::abs(var - 1.0) <= 1e-5);
    }
    // Running mean moved one tenth of the way from 0 toward the batch mean.
    double batch_mean = 0.0;
    for (std::size_t b = 0; b < 64; ++b) batch_mean += x[b * 4 + 2] / 64.0;
    CHECK(bn.running_mean()[2] == doctest::Approx(0.1 * batch_mean).epsilon(1e-12));

    Tensor single({1, 4}, {1, 2, 3, 4});
    const Tensor inf = bn.forward(single, {Phase::Infer, nullptr});
    for (std::size_t f = 0; f < 4; ++f)
        CHECK(inf[f] == doctest::Approx((single[f] - bn.running_mean()[f]) / std::sqrt(bn.running_var()[f] + 1e-5)));
    const std::vector<double> before(bn.running_mean().begin(), bn.running_mean().end());
    bn.forward(single, {Phase::Infer, nullptr});
    CHECK(std::equal(before.begin(), before.end(), bn.running_mean().begin()));
}

TEST_CASE("dropout drops about p and preserves the expectation") {
    const double p = 0.5;
    const std::size_t n = 10000;
    Dropout drop(p);
    std::mt19937_64 rng(12);
    Tensor x({1, n}, 1.0);
    const Tensor y = drop.forward(x, {Phase::Train, &rng});
    std::size_t zeros = 0;
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        zeros += y[k] == 0.0 ? 1 : 0;
        sum += y[k];
        CHECK((y[k] == 0.0 || y[k] == 2.0));
    }
    const double sigma = std::sqrt(n * p * (1 - p));
    CHECK(std::abs(static_cast<double>(zeros) - n * p) <= 3 * sigma);
    CHECK(std::abs(sum / n - 1.0) <= 3 * 2.0 * std::sqrt(p * (1 - p) / n));

    const Tensor inf = drop.forward(x, {Phase::Infer, nullptr});
    CHECK(std::equal(inf.values().begin(), inf.values().end(), x.values().begin()));
    CHECK_THROWS_AS(Dropout(1.0), SpecError);
}

TEST_CASE("max pool halves the width and routes gradients to the argmax") {
    Pool1D pool(2, 2, PoolKind::Max);
    Tensor x({1, 1, 7}, {1, 5, 3, 2, 0, 9, 4});
    const Tensor y = pool.forward(x, {});
    REQUIRE(y.shape() == Shape{1, 1, 3});
    CHECK(y.storage() == std::vector<double>{5, 3, 9});
    const Tensor g = pool.backward(Tensor({1, 1, 3}, {1, 2, 3}));
    CHECK(g.storage() == std::vector<double>{0, 1, 2, 0, 0, 3, 0});
    CHECK(pool.output_shape({4, 30}) == Shape{4, 15});
}

TEST_CASE("softmax cross-entropy") {
    const Tensor equal({1, 4}, {0.3, 0.3, 0.3, 0.3});
    const std::vector<std::size_t> label{2};
    CHECK(softmax_cross_entropy(equal, label).loss == doctest::Approx(std::log(4.0)).epsilon(1e-14));

    const Tensor extreme({1, 2}, {1000.0, -1000.0});
    const std::vector<std::size_t> first{0};
    const auto r = softmax_cross_entropy(extreme, first);
    CHECK(std::isfinite(r.loss));
    CHECK(r.loss == doctest::Approx(0.0));
    CHECK_THROWS_AS(softmax_cross_entropy(extreme, std::vector<std::size_t>{2}), std::invalid_argument);
}

TEST_CASE("adam first step moves by the learning rate against the gradient sign") {
    for (double g : {0.37, -2.5, 1e-3}) {
        std::vector<double> value{1.0}, grad{g};
        std::vector<ParameterRef> params{{"p", {1}, value, grad}};
        auto state = make_adam_state(params);
        adam_step(AdamConfig{}, state, params);
        const double move = value[0] - 1.0;
        CHECK(std::abs(std::abs(move) - 0.001) <= 1e-6);
        CHECK((move < 0) == (g > 0));
        CHECK(state.step == 1);
    }
}

TEST_CASE("network builds the expected shapes") {
    NetworkSpec lsst;
    lsst.channels = 6;
    lsst.length = 36;
    lsst.classes = 24;
    lsst.front.filters = 8;
    lsst.front.size = 7;
    lsst.front.stride = 1;
    Network net(lsst);
    REQUIRE(net.shapes().size() == net.layer_count() + 1);
    CHECK(net.shapes()[1] == Shape{48, 30});
    CHECK(net.shapes()[2] == Shape{48, 15});
    CHECK(net.shapes()[3] == Shape{128, 11});
    CHECK(net.shapes().back() == Shape{24});
    CHECK(net.layer_count() == 13);

    NetworkSpec trivial;
    trivial.length = 8;
    trivial.classes = 2;
    trivial.front.filters = 1;
    trivial.front.size = 1;
    trivial.conv_size = 2;
    Network small(trivial);
    Tensor x({1, 1, 8}, 0.5);
    const Tensor logits = small.forward(x, {Phase::Infer, nullptr});
    CHECK(logits.shape() == Shape{1, 2});

    trivial.conv_size = 5;
    try {
        Network bad(trivial);
        FAIL("expected a spec error");
    } catch (const SpecError& e) {
        CHECK(std::string(e.what()).find("conv1d(conv") != std::string::npos);
    }
}

TEST_CASE("same seed gives identical parameters and trajectories") {
    for (auto kind : {FrontKind::Dtw, FrontKind::Standard}) {
        Network a(tiny_spec(kind, 5)), b(tiny_spec(kind, 5)), c(tiny_spec(kind, 6));
        CHECK(snapshot(a) == snapshot(b));
        CHECK(snapshot(a) != snapshot(c));

        std::mt19937_64 data(1);
        const Tensor x = testing::kink_free_tensor(data, {6, 2, 16});
        const std::vector<std::size_t> labels{0, 1, 2, 0, 1, 2};
        AdamState sa, sb;
        std::mt19937_64 ra(9), rb(9);
        for (int step = 0; step < 5; ++step)
            CHECK(train_step(a, x, labels, {}, sa, ra) == train_step(b, x, labels, {}, sb, rb));
        CHECK(snapshot(a) == snapshot(b));
    }
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
    Network net(tiny_spec(FrontKind::Dtw));
    std::mt19937_64 data(4);
    const Tensor x = testing::kink_free_tensor(data, {3, 2, 16});
    const std::vector<std::size_t> labels{0, 1, 2};
    const auto params_before = net.parameters();
    std::vector<double> before;
    for (const auto& p : params_before) before.insert(before.end(), p.value.begin(), p.value.end());
    AdamState state;
    AdamConfig frozen;
    frozen.learning_rate = 0.0;
    train_step(net, x, labels, frozen, state, data);
    std::vector<double> after;
    for (const auto& p : net.parameters()) after.insert(after.end(), p.value.begin(), p.value.end());
    CHECK(std::memcmp(before.data(), after.data(), before.size() * sizeof(double)) == 0);
}

TEST_CASE("training overfits a separable toy batch") {
    for (auto kind : {FrontKind::Dtw, FrontKind::Standard}) {
        NetworkSpec spec = tiny_spec(kind);
        spec.channels = 1;
        spec.classes = 2;
        spec.dense1 = 64;
        spec.dense2 = 32;
        Network net(spec);
        std::mt19937_64 rng(21);
        Tensor x({8, 1, 16});
        std::vector<std::size_t> labels(8);
        for (std::size_t b = 0; b < 8; ++b) {
            labels[b] = b % 2;
            for (std::size_t t = 0; t < 16; ++t)
                x[b * 16 + t] = (labels[b] == 0 ? std::sin(0.4 * t) : std::cos(1.3 * t)) +
                                0.1 * std::normal_distribution<double>(0, 1)(rng);
        }
        AdamState state;
        double first = 0.0, last = 0.0;
        for (int step = 0; step < 500; ++step) {
            last = train_step(net, x, labels, {}, state, rng);
            if (step == 0) first = last;
        }
        CHECK(last < 0.1 * first);
        CHECK(evaluate(net, x, labels).accuracy == 1.0);
    }
}

TEST_CASE("evaluate") {
    Network net(tiny_spec(FrontKind::Standard));
    CHECK_THROWS_AS(evaluate(net, Tensor({0, 2, 16}), {}), std::invalid_argument);

    // Zeroing the logits layer makes every prediction class 0.
    for (auto& p : net.parameters())
        if (p.name.rfind("logits.", 0) == 0) std::fill(p.value.begin(), p.value.end(), 0.0);
    const std::size_t m = 600, k = 3;
    std::mt19937_64 rng(2);
    const Tensor x = testing::kink_free_tensor(rng, {m, 2, 16});
    std::vector<std::size_t> labels(m);
    for (std::size_t i = 0; i < m; ++i) labels[i] = i % k;
    std::shuffle(labels.begin(), labels.end(), rng);
    const double acc = evaluate(net, x, labels, 64).accuracy;
    const double p = 1.0 / k;
    CHECK(std::abs(acc - p) <= 3 * std::sqrt(p * (1 - p) / m));
    CHECK(evaluate(net, x, labels, 64).accuracy == evaluate(net, x, labels, 7).accuracy);
}

TEST_CASE("checkpoint round trip is bit exact") {
    const auto dir = std::filesystem::temp_directory_path() / "warpconv_test_ckpt";
    std::filesystem::create_directories(dir);
    const auto file = dir / "net.ckpt";

    Network net(tiny_spec(FrontKind::Dtw, 17));
    std::mt19937_64 rng(3);
    const Tensor x = testing::kink_free_tensor(rng, {6, 2, 16});
    const std::vector<std::size_t> labels{0, 1, 2, 2, 1, 0};
    AdamState state;
    for (int i = 0; i < 3; ++i) train_step(net, x, labels, {}, state, rng);
    save_checkpoint(file, net, state, 3);

    auto other_spec = tiny_spec(FrontKind::Dtw, 17);
    Network copy(other_spec);
    CHECK(snapshot(copy) != snapshot(net));
    AdamState restored;
    const auto info = load_checkpoint(file, copy, restored);
    CHECK(info.iteration == 3);
    CHECK(info.seed == 17);
    CHECK(snapshot(copy) == snapshot(net));
    CHECK(restored.step == state.step);
    CHECK(restored.first == state.first);
    CHECK(restored.second == state.second);
    CHECK(evaluate(copy, x, labels).accuracy == evaluate(net, x, labels).accuracy);
    CHECK(evaluate(copy, x, labels).loss == evaluate(net, x, labels).loss);

    Network different(tiny_spec(FrontKind::Standard, 17));
    CHECK_THROWS_AS(load_checkpoint(file, different, restored), CheckpointError);

    const auto size = std::filesystem::file_size(file);
    std::filesystem::resize_file(file, size - 5);
    CHECK_THROWS_AS(load_checkpoint(file, copy, restored), CheckpointError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("metric windows") {
    const std::vector<AccuracyRecord> hist{{1, 0.5}, {2, 0.7}};
    const std::vector<MetricWindow> both{{1, 2}};
    const auto s = metric_windows(hist, both);
    REQUIRE(s[0].has_value());
    CHECK(s[0]->mean == doctest::Approx(0.6));
    CHECK(s[0]->max == 0.7);
    CHECK(s[0]->std == doctest::Approx(0.1));

    const std::vector<MetricWindow> parts{{2, 2}, {3, 9}, {0, 1}};
    const auto p = metric_windows(hist, parts);
    CHECK(p[0]->mean == 0.7);
    CHECK(p[0]->std == 0.0);
    CHECK(p[0]->max == 0.7);
    CHECK_FALSE(p[1].has_value());
    CHECK(p[2]->mean == 0.5);

    const std::vector<AccuracyRecord> flat{{10, 0.25}, {20, 0.25}, {30, 0.25}};
    for (const auto& w : metric_windows(flat, std::vector<MetricWindow>{{0, 15}, {10, 30}, {25, 40}}))
        CHECK(w->std == 0.0);

    const std::vector<AccuracyRecord> unsorted{{2, 0.1}, {1, 0.2}};
    CHECK_THROWS_AS(metric_windows(unsorted, both), std::invalid_argument);
}
