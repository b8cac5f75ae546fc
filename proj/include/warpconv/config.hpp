#ifndef WARPCONV_CONFIG_HPP
#define WARPCONV_CONFIG_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "warpconv/data_io.hpp"
#include "warpconv/nn/metrics.hpp"
#include "warpconv/nn/network.hpp"

namespace warpconv {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Ordered key = value pairs; '#' starts a comment. Duplicate keys are rejected.
struct KeyValueFile {
    std::vector<std::pair<std::string, std::string>> entries;
    std::map<std::string, std::size_t> lines;  // key -> 1-based line

    static KeyValueFile parse(std::string_view text, const std::string& source = "<config>");
    const std::string* find(const std::string& key) const;
};

struct DataSource {
    enum class Kind { Synth, Files } kind = Kind::Synth;
    DataFormat format = DataFormat::UcrTsv;
    std::filesystem::path train_path, test_path;
    bool znormalize = true;
    std::optional<std::pair<double, std::uint64_t>> merge_shuffle_split;  // train fraction, seed
    bool swap_splits = false;
    std::optional<std::size_t> require_channels;

    std::size_t synth_classes = 4;
    std::size_t synth_length = 64;
    std::size_t synth_per_class = 100;
    WarpSpec warp{};
};

struct ExperimentConfig {
    DataSource data;
    nn::NetworkSpec network;  // channels, length and classes are filled from the data
    std::size_t batch_size = 100;
    std::size_t iterations = 1000;
    std::size_t eval_every = 100;
    std::size_t checkpoint_every = 0;  // 0: final checkpoint only
    double learning_rate = 0.001;
    std::uint64_t seed = 0;
    std::vector<nn::MetricWindow> windows;
    std::filesystem::path output_dir = "run";
    std::string arm;

    /// Optional single-key sweep: every value yields one arm in its own subdirectory.
    std::string sweep_key;
    std::vector<std::string> sweep_values;

    std::string source_text;  // verbatim config file

    /// Every recognized key with its description, for documentation and error messages.
    static const std::vector<std::pair<std::string, std::string>>& keys();
};

/// Parses and validates; throws ConfigError naming the key and line.
ExperimentConfig parse_experiment_config(std::string_view text, const std::string& source = "<config>");
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Applies key = value on top of an already parsed config (used by sweeps).
void apply_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);

/// "a-b, c-d" -> inclusive windows.
std::vector<nn::MetricWindow> parse_windows(std::string_view text);

/// Splits on commas and trims blanks.
std::vector<std::string> split_list(std::string_view text);

/// Reads a WarpSpec plus classes/length/per_class from synth.* keys.
DataSource parse_synth_spec(std::string_view text, const std::string& source = "<spec>");

}  // namespace warpconv

#endif
