#include "warpconv/experiment.hpp"

#include <charconv>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>

#include "warpconv/nn/checkpoint.hpp"

namespace warpconv {

namespace {

std::string real_text(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("write failed for " + path.string());
}

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
    return std::mt19937_64(seq);
}

nn::Tensor gather(const TimeSeriesDataset& ds, std::span<const std::size_t> rows, std::vector<std::size_t>& labels) {
    const std::size_t per = ds.channels * ds.length;
    nn::Tensor t({rows.size(), ds.channels, ds.length});
    labels.resize(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto ex = ds.example(rows[k]);
        std::copy(ex.begin(), ex.end(), t.data() + k * per);
        labels[k] = ds.labels[rows[k]];
    }
    return t;
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
    return s;
}

}  // namespace

DataSplits load_experiment_data(const ExperimentConfig& config) {
    const auto& src = config.data;
    DataSplits splits;
    if (src.kind == DataSource::Kind::Synth) {
        splits = synth_warped(src.synth_classes, src.synth_length, src.synth_per_class, src.warp);
    } else {
        LoadOptions options;
        options.require_channels = src.require_channels;
        splits.train = load_delimited(src.train_path, src.format, options);
        splits.test = load_delimited(src.test_path, src.format, options);
        if (splits.train.channels != splits.test.channels || splits.train.length != splits.test.length)
            throw DataError("train is " + std::to_string(splits.train.channels) + "x" +
                            std::to_string(splits.train.length) + " but test is " +
                            std::to_string(splits.test.channels) + "x" + std::to_string(splits.test.length));
        unify_classes(splits);
        if (src.swap_splits) splits = swap_splits(std::move(splits));
        if (src.merge_shuffle_split)
            splits = merge_shuffle_split(splits, src.merge_shuffle_split->first, src.merge_shuffle_split->second);
    }
    if (splits.train.examples == 0 || splits.test.examples == 0) throw DataError("a data split is empty");
    if (src.znormalize) znormalize(splits);
    return splits;
}

nn::Tensor to_tensor(const TimeSeriesDataset& ds) {
    return nn::Tensor({ds.examples, ds.channels, ds.length}, ds.values);
}

std::string default_arm_name(const ExperimentConfig& config) {
    if (!config.arm.empty()) return config.arm;
    return std::string(nn::to_string(config.network.front_kind));
}

ArmResult run_arm(const ExperimentConfig& config, const DataSplits& data,
                  const std::optional<std::filesystem::path>& dir, std::ostream* log) {
    nn::NetworkSpec spec = config.network;
    spec.channels = data.train.channels;
    spec.length = data.train.length;
    spec.classes = data.train.class_count();
    spec.seed = config.seed;
    if (spec.classes < 2) throw DataError("training data holds fewer than two classes");

    nn::Network net(spec);
    nn::AdamConfig adam_config;
    adam_config.learning_rate = config.learning_rate;
    nn::AdamState adam;
    auto batch_rng = derived_rng(config.seed, 1);
    auto dropout_rng = derived_rng(config.seed, 2);

    ArmResult result;
    result.arm = default_arm_name(config);
    result.parameter_count = net.parameter_count();
    if (dir) std::filesystem::create_directories(*dir / "checkpoints");

    const nn::Tensor test_x = to_tensor(data.test);
    const std::size_t batch = std::min(config.batch_size, data.train.examples);
    std::vector<std::size_t> order(data.train.examples);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), batch_rng);
    std::size_t cursor = 0;

    std::vector<std::size_t> labels, predictions;
    double loss_sum = 0.0;
    std::size_t seen = 0, correct = 0, steps = 0;
    for (std::size_t it = 1; it <= config.iterations; ++it) {
        if (cursor + batch > order.size()) {
            std::shuffle(order.begin(), order.end(), batch_rng);
            cursor = 0;
        }
        const auto x = gather(data.train, std::span(order).subspan(cursor, batch), labels);
        cursor += batch;
        loss_sum += nn::train_step(net, x, labels, adam_config, adam, dropout_rng, &predictions);
        ++steps;
        for (std::size_t k = 0; k < batch; ++k) correct += predictions[k] == labels[k] ? 1 : 0;
        seen += batch;

        const bool eval_now = it % config.eval_every == 0 || it == config.iterations;
        if (eval_now) {
            result.rows.push_back({it, "train", loss_sum / static_cast<double>(steps),
                                   static_cast<double>(correct) / static_cast<double>(seen)});
            const auto ev = nn::evaluate(net, test_x, data.test.labels);
            result.rows.push_back({it, "test", ev.loss, ev.accuracy});
            if (log)
                *log << result.arm << " iteration " << it << " train_loss " << result.rows[result.rows.size() - 2].loss
                     << " test_loss " << ev.loss << " test_accuracy " << ev.accuracy << "\n";
            loss_sum = 0.0;
            seen = correct = steps = 0;
        }
        if (dir && config.checkpoint_every > 0 && it % config.checkpoint_every == 0)
            nn::save_checkpoint(*dir / "checkpoints" / ("iter_" + std::to_string(it) + ".ckpt"), net, adam, it);
    }
    if (dir) {
        nn::save_checkpoint(*dir / "checkpoints" / "final.ckpt", net, adam, config.iterations);
        write_text(*dir / "metrics.csv", format_metrics_csv(result.rows));
    }
    const auto history = test_history(result.rows);
    result.windows = nn::metric_windows(history, config.windows);
    return result;
}

std::vector<ArmResult> run_experiment(const ExperimentConfig& config, std::ostream* log) {
    const auto& root = config.output_dir;
    std::filesystem::create_directories(root);
    write_text(root / "config.copy", config.source_text);

    std::vector<ArmResult> arms;
    if (config.sweep_key.empty()) {
        const auto data = load_experiment_data(config);
        arms.push_back(run_arm(config, data, root, log));
    } else {
        for (const auto& value : config.sweep_values) {
            ExperimentConfig arm_config = config;
            apply_config_value(arm_config, config.sweep_key, value);
            arm_config.arm = (config.arm.empty() ? "" : config.arm + ":") + config.sweep_key + "=" + value;
            const auto data = load_experiment_data(arm_config);
            arms.push_back(run_arm(arm_config, data, root / sanitize(config.sweep_key + "=" + value), log));
        }
    }
    write_text(root / "summary.csv", format_summary_csv(config.windows, arms));
    return arms;
}

std::string format_metrics_csv(const std::vector<MetricRow>& rows) {
    std::string out = "iteration,split,loss,accuracy\n";
    for (const auto& r : rows)
        out += std::to_string(r.iteration) + "," + r.split + "," + real_text(r.loss) + "," + real_text(r.accuracy) + "\n";
    return out;
}

std::vector<MetricRow> parse_metrics_csv(std::string_view text) {
    std::vector<MetricRow> rows;
    std::size_t k = 0;
    bool header = true;
    while (k < text.size()) {
        const std::size_t end = std::min(text.find('\n', k), text.size());
        const std::string_view line = text.substr(k, end - k);
        k = end + 1;
        if (line.empty()) continue;
        if (header) {
            if (line != "iteration,split,loss,accuracy") throw DataError("metrics.csv: unexpected header");
            header = false;
            continue;
        }
        const std::string s(line);
        const auto malformed = [&] { return DataError("metrics.csv: malformed row '" + s + "'"); };
        const auto c1 = s.find(',');
        const auto c2 = c1 == std::string::npos ? c1 : s.find(',', c1 + 1);
        const auto c3 = c2 == std::string::npos ? c2 : s.find(',', c2 + 1);
        if (c3 == std::string::npos) throw malformed();
        MetricRow r;
        const auto parse = [&](std::size_t from, std::size_t to, auto& value) {
            const auto [ptr, ec] = std::from_chars(s.data() + from, s.data() + to, value);
            if (ec != std::errc() || ptr != s.data() + to) throw malformed();
        };
        parse(0, c1, r.iteration);
        r.split = s.substr(c1 + 1, c2 - c1 - 1);
        parse(c2 + 1, c3, r.loss);
        parse(c3 + 1, s.size(), r.accuracy);
        rows.push_back(r);
    }
    return rows;
}

std::vector<nn::AccuracyRecord> test_history(const std::vector<MetricRow>& rows) {
    std::vector<nn::AccuracyRecord> out;
    for (const auto& r : rows)
        if (r.split == "test") out.push_back({r.iteration, r.accuracy});
    return out;
}

std::string format_summary_csv(const std::vector<nn::MetricWindow>& windows, const std::vector<ArmResult>& arms) {
    std::string out = "window_start,window_end,mean,std,max,arm\n";
    for (const auto& arm : arms)
        for (std::size_t w = 0; w < windows.size(); ++w) {
            out += std::to_string(windows[w].start) + "," + std::to_string(windows[w].end) + ",";
            const auto& s = arm.windows.at(w);
            if (s) out += real_text(s->mean) + "," + real_text(s->std) + "," + real_text(s->max);
            else out += ",,";
            out += "," + arm.arm + "\n";
        }
    return out;
}

}  // namespace warpconv
