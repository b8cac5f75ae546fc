#include "warpconv/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace warpconv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <class T>
T parse_number(const std::string& v) {
    T out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw std::invalid_argument("'" + v + "' is not a valid number");
    return out;
}

std::size_t to_size(const std::string& v) {
    if (!v.empty() && v.front() == '-') throw std::invalid_argument("'" + v + "' must be non-negative");
    return parse_number<std::size_t>(v);
}

std::size_t to_positive(const std::string& v) {
    const auto n = to_size(v);
    if (n == 0) throw std::invalid_argument("must be >= 1");
    return n;
}

double to_real(const std::string& v) { return parse_number<double>(v); }

bool to_bool(const std::string& v) {
    if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "off" || v == "no" || v == "0") return false;
    throw std::invalid_argument("'" + v + "' is not a boolean");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

struct KeySpec {
    std::string key;
    std::string help;
    Setter set;
};

const std::vector<KeySpec>& key_table() {
    static const std::vector<KeySpec> table = {
        {"data.source", "synth | files", [](auto& c, auto& v) {
             if (v == "synth") c.data.kind = DataSource::Kind::Synth;
             else if (v == "files") c.data.kind = DataSource::Kind::Files;
             else throw std::invalid_argument("expected synth or files");
         }},
        {"data.format", "ucr-tsv | long-csv", [](auto& c, auto& v) { c.data.format = parse_data_format(v); }},
        {"data.train", "training split path", [](auto& c, auto& v) { c.data.train_path = v; }},
        {"data.test", "test split path", [](auto& c, auto& v) { c.data.test_path = v; }},
        {"data.znormalize", "per-channel z-normalization with train statistics (default true)",
         [](auto& c, auto& v) { c.data.znormalize = to_bool(v); }},
        {"data.merge_shuffle_split", "<train fraction>,<seed>: merge both splits, shuffle and re-split",
         [](auto& c, auto& v) {
             const auto parts = split_list(v);
             if (parts.size() != 2) throw std::invalid_argument("expected <fraction>,<seed>");
             const double f = to_real(parts[0]);
             if (!(f > 0.0 && f < 1.0)) throw std::invalid_argument("fraction must lie in (0, 1)");
             c.data.merge_shuffle_split = std::make_pair(f, parse_number<std::uint64_t>(parts[1]));
         }},
        {"data.swap_splits", "use the test file for training and vice versa",
         [](auto& c, auto& v) { c.data.swap_splits = to_bool(v); }},
        {"data.require_channels", "long-csv: keep only examples with exactly this many channels",
         [](auto& c, auto& v) { c.data.require_channels = to_positive(v); }},
        {"synth.classes", "number of classes", [](auto& c, auto& v) { c.data.synth_classes = to_size(v); }},
        {"synth.length", "series length", [](auto& c, auto& v) { c.data.synth_length = to_size(v); }},
        {"synth.per_class", "examples per class across both splits",
         [](auto& c, auto& v) { c.data.synth_per_class = to_positive(v); }},
        {"synth.events", "warp events per series", [](auto& c, auto& v) { c.data.warp.events = to_size(v); }},
        {"synth.max_stretch", "largest local rate factor (>= 1)",
         [](auto& c, auto& v) { c.data.warp.max_stretch = to_real(v); }},
        {"synth.width_min", "shortest event, in samples", [](auto& c, auto& v) { c.data.warp.width_min = to_size(v); }},
        {"synth.width_max", "longest event, in samples", [](auto& c, auto& v) { c.data.warp.width_max = to_size(v); }},
        {"synth.noise", "additive Gaussian noise sigma", [](auto& c, auto& v) { c.data.warp.noise_sigma = to_real(v); }},
        {"synth.seed", "generator seed", [](auto& c, auto& v) { c.data.warp.seed = parse_number<std::uint64_t>(v); }},
        {"synth.test_fraction", "share of each class held out for testing",
         [](auto& c, auto& v) { c.data.warp.test_fraction = to_real(v); }},
        {"synth.harmonics", "Fourier terms per prototype",
         [](auto& c, auto& v) { c.data.warp.harmonics = to_positive(v); }},
        {"synth.separation", "weight of the class-specific shape in (0, 1]",
         [](auto& c, auto& v) { c.data.warp.separation = to_real(v); }},
        {"front.kind", "dtw | standard", [](auto& c, auto& v) { c.network.front_kind = nn::parse_front_kind(v); }},
        {"front.filters", "filters per channel", [](auto& c, auto& v) { c.network.front.filters = to_positive(v); }},
        {"front.size", "filter length", [](auto& c, auto& v) { c.network.front.size = to_positive(v); }},
        {"front.stride", "window stride", [](auto& c, auto& v) { c.network.front.stride = to_positive(v); }},
        {"front.r", "band radius", [](auto& c, auto& v) { c.network.front.band = BandConfig{to_size(v)}; }},
        {"front.mode", "symmetric | x-onto-w | w-onto-x",
         [](auto& c, auto& v) { c.network.front.mode = parse_normalization(v); }},
        {"front.apply_mode", "both | train-only | infer-only | never",
         [](auto& c, auto& v) { c.network.front.apply_mode = parse_apply_mode(v); }},
        {"arch.pool", "max | mean", [](auto& c, auto& v) {
             if (v == "max") c.network.pool_kind = nn::PoolKind::Max;
             else if (v == "mean") c.network.pool_kind = nn::PoolKind::Mean;
             else throw std::invalid_argument("expected max or mean");
         }},
        {"arch.pool_size", "pool window", [](auto& c, auto& v) { c.network.pool_size = to_positive(v); }},
        {"arch.pool_stride", "pool stride", [](auto& c, auto& v) { c.network.pool_stride = to_positive(v); }},
        {"arch.conv_filters", "filters of the volume convolution",
         [](auto& c, auto& v) { c.network.conv_filters = to_positive(v); }},
        {"arch.conv_size", "size of the volume convolution", [](auto& c, auto& v) { c.network.conv_size = to_positive(v); }},
        {"arch.conv_stride", "stride of the volume convolution",
         [](auto& c, auto& v) { c.network.conv_stride = to_positive(v); }},
        {"arch.dense1", "units of the first dense layer", [](auto& c, auto& v) { c.network.dense1 = to_positive(v); }},
        {"arch.dense2", "units of the second dense layer", [](auto& c, auto& v) { c.network.dense2 = to_positive(v); }},
        {"arch.dropout", "drop probability", [](auto& c, auto& v) {
             const double p = to_real(v);
             if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("must lie in [0, 1)");
             c.network.dropout = p;
         }},
        {"train.batch_size", "mini-batch size", [](auto& c, auto& v) { c.batch_size = to_positive(v); }},
        {"train.iterations", "optimizer steps", [](auto& c, auto& v) { c.iterations = to_positive(v); }},
        {"train.eval_every", "evaluate the test split every n iterations",
         [](auto& c, auto& v) { c.eval_every = to_positive(v); }},
        {"train.checkpoint_every", "checkpoint every n iterations (0: final only)",
         [](auto& c, auto& v) { c.checkpoint_every = to_size(v); }},
        {"train.learning_rate", "Adam step size", [](auto& c, auto& v) {
             const double a = to_real(v);
             if (!(a >= 0.0)) throw std::invalid_argument("must be >= 0");
             c.learning_rate = a;
         }},
        {"train.seed", "seed for initialization, batching and dropout",
         [](auto& c, auto& v) { c.seed = parse_number<std::uint64_t>(v); }},
        {"metrics.windows", "inclusive iteration windows, e.g. 100-500, 600-1000",
         [](auto& c, auto& v) { c.windows = parse_windows(v); }},
        {"output.dir", "run directory", [](auto& c, auto& v) { c.output_dir = v; }},
        {"output.arm", "arm label written to summary.csv (default: front kind)",
         [](auto& c, auto& v) { c.arm = v; }},
    };
    return table;
}

const KeySpec* lookup(const std::string& key) {
    for (const auto& k : key_table())
        if (k.key == key) return &k;
    return nullptr;
}

void validate(const ExperimentConfig& c, const std::string& source) {
    auto fail = [&](const std::string& msg) { throw ConfigError(source + ": " + msg); };
    if (c.data.kind == DataSource::Kind::Files) {
        if (c.data.train_path.empty() || c.data.test_path.empty())
            fail("data.source = files needs data.train and data.test");
        if (c.data.format == DataFormat::UcrTsv && c.data.require_channels && *c.data.require_channels != 1)
            fail("data.require_channels applies to long-csv input only");
    } else {
        if (c.data.synth_classes < 2) fail("synth.classes must be >= 2");
        try {
            c.data.warp.validate(c.data.synth_length);
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
    }
    if (c.network.front_kind == nn::FrontKind::Standard && c.network.front.apply_mode != ApplyMode::Both &&
        c.network.front.apply_mode != ApplyMode::Never)
        fail("front.apply_mode has no effect with front.kind = standard");
    for (const auto& w : c.windows)
        if (w.end > c.iterations)
            fail("metrics window " + std::to_string(w.start) + "-" + std::to_string(w.end) +
                 " ends after train.iterations");
    if (c.output_dir.empty()) fail("output.dir must not be empty");
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::string_view text, const std::string& source) {
    KeyValueFile f;
    std::size_t line = 0, k = 0;
    while (k <= text.size()) {
        const std::size_t end = text.find('\n', k);
        std::string_view l = text.substr(k, end == std::string_view::npos ? std::string_view::npos : end - k);
        ++line;
        k = end == std::string_view::npos ? text.size() + 1 : end + 1;
        if (const auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
        l = trim(l);
        if (l.empty()) continue;
        const auto eq = l.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(source + ":" + std::to_string(line) + ": expected key = value");
        std::string key(trim(l.substr(0, eq)));
        std::string value(trim(l.substr(eq + 1)));
        if (key.empty()) throw ConfigError(source + ":" + std::to_string(line) + ": empty key");
        if (f.lines.count(key))
            throw ConfigError(source + ":" + std::to_string(line) + ": duplicate key '" + key + "' (first on line " +
                              std::to_string(f.lines[key]) + ")");
        f.lines[key] = line;
        f.entries.emplace_back(std::move(key), std::move(value));
    }
    return f;
}

const std::string* KeyValueFile::find(const std::string& key) const {
    for (const auto& [k, v] : entries)
        if (k == key) return &v;
    return nullptr;
}

const std::vector<std::pair<std::string, std::string>>& ExperimentConfig::keys() {
    static const auto list = [] {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& k : key_table()) out.emplace_back(k.key, k.help);
        out.emplace_back("sweep.<key>", "comma-separated values; one arm per value");
        return out;
    }();
    return list;
}

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    std::size_t k = 0;
    while (k <= text.size()) {
        const std::size_t end = text.find(',', k);
        const auto part = trim(text.substr(k, end == std::string_view::npos ? std::string_view::npos : end - k));
        if (!part.empty()) out.emplace_back(part);
        if (end == std::string_view::npos) break;
        k = end + 1;
    }
    return out;
}

std::vector<nn::MetricWindow> parse_windows(std::string_view text) {
    std::vector<nn::MetricWindow> out;
    for (const auto& part : split_list(text)) {
        const auto dash = part.find('-');
        if (dash == std::string::npos) throw std::invalid_argument("window '" + part + "' is not start-end");
        const std::string a(trim(std::string_view(part).substr(0, dash)));
        const std::string b(trim(std::string_view(part).substr(dash + 1)));
        nn::MetricWindow w{parse_number<std::uint64_t>(a), parse_number<std::uint64_t>(b)};
        if (w.end < w.start) throw std::invalid_argument("window '" + part + "' ends before it starts");
        out.push_back(w);
    }
    return out;
}

void apply_config_value(ExperimentConfig& config, const std::string& key, const std::string& value) {
    const auto* spec = lookup(key);
    if (!spec) throw ConfigError("unknown key '" + key + "'");
    try {
        spec->set(config, value);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

ExperimentConfig parse_experiment_config(std::string_view text, const std::string& source) {
    const auto file = KeyValueFile::parse(text, source);
    ExperimentConfig c;
    c.source_text = std::string(text);
    for (const auto& [key, value] : file.entries) {
        const std::string where = source + ":" + std::to_string(file.lines.at(key)) + ": ";
        if (key.rfind("sweep.", 0) == 0) {
            if (!c.sweep_key.empty()) throw ConfigError(where + "only one sweep key is supported");
            c.sweep_key = key.substr(6);
            c.sweep_values = split_list(value);
            if (!lookup(c.sweep_key)) throw ConfigError(where + "sweep over unknown key '" + c.sweep_key + "'");
            if (c.sweep_values.empty()) throw ConfigError(where + "sweep needs at least one value");
            continue;
        }
        const auto* spec = lookup(key);
        if (!spec) throw ConfigError(where + "unknown key '" + key + "'");
        try {
            spec->set(c, value);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(where + key + ": " + e.what());
        }
    }
    if (!c.sweep_key.empty()) {
        for (const auto& v : c.sweep_values) {
            ExperimentConfig probe = c;
            try {
                lookup(c.sweep_key)->set(probe, v);
                validate(probe, source);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(source + ":" + std::to_string(file.lines.at("sweep." + c.sweep_key)) + ": sweep." +
                                  c.sweep_key + " value '" + v + "': " + e.what());
            }
        }
    }
    c.network.seed = c.seed;
    validate(c, source);
    return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config(buf.str(), path.string());
}

DataSource parse_synth_spec(std::string_view text, const std::string& source) {
    const auto file = KeyValueFile::parse(text, source);
    ExperimentConfig c;
    for (const auto& [key, value] : file.entries) {
        const std::string where = source + ":" + std::to_string(file.lines.at(key)) + ": ";
        if (key.rfind("synth.", 0) != 0) throw ConfigError(where + "synth spec accepts synth.* keys only, got '" + key + "'");
        const auto* spec = lookup(key);
        if (!spec) throw ConfigError(where + "unknown key '" + key + "'");
        try {
            spec->set(c, value);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(where + key + ": " + e.what());
        }
    }
    validate(c, source);
    return c.data;
}

}  // namespace warpconv
