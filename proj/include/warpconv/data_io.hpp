#ifndef WARPCONV_DATA_IO_HPP
#define WARPCONV_DATA_IO_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace warpconv {

/// Malformed input file; the message carries the path and line number.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// M examples of C channels by L samples, stored example-major then channel-major.
struct TimeSeriesDataset {
    std::size_t examples = 0;
    std::size_t channels = 0;
    std::size_t length = 0;
    std::vector<double> values;       // M x C x L
    std::vector<std::size_t> labels;  // in [0, class_labels.size())
    std::vector<long long> class_labels;  // original label for each class index, ascending

    std::size_t class_count() const { return class_labels.size(); }
    std::span<const double> example(std::size_t m) const {
        return {values.data() + m * channels * length, channels * length};
    }
    std::span<const double> series(std::size_t m, std::size_t c) const {
        return {values.data() + (m * channels + c) * length, length};
    }
    /// Throws DataError when sizes or labels are inconsistent.
    void validate() const;
};

bool operator==(const TimeSeriesDataset& a, const TimeSeriesDataset& b);

enum class DataFormat { UcrTsv, LongCsv };

DataFormat parse_data_format(std::string_view text);
std::string_view to_string(DataFormat format);

struct LoadOptions {
    /// Original labels to map onto class indices; labels outside the list are
    /// rejected. When empty the sorted set of labels in the file is used.
    std::vector<long long> class_labels;
    /// LongCsv only: keep just the examples carrying exactly this many channels.
    std::optional<std::size_t> require_channels;
};

/*
 * UcrTsv: one example per line, an integer label followed by the univariate
 * series; fields split on tabs, commas or spaces. LongCsv: header
 * example,channel,t,value,label and one row per sample.
 */
TimeSeriesDataset load_delimited(const std::filesystem::path& path, DataFormat format,
                                 const LoadOptions& options = {});
TimeSeriesDataset parse_delimited(std::string_view text, DataFormat format, const LoadOptions& options = {},
                                  const std::string& source = "<memory>");

/// Shortest round-trip text for every value; loading the output reproduces the dataset bit for bit.
std::string format_delimited(const TimeSeriesDataset& ds, DataFormat format);
void write_delimited(const TimeSeriesDataset& ds, const std::filesystem::path& path, DataFormat format);

struct DataSplits {
    TimeSeriesDataset train;
    TimeSeriesDataset test;
};

/// Union of both splits, shuffled under seed, re-split with train_fraction of
/// every class kept for training.
DataSplits merge_shuffle_split(const DataSplits& splits, double train_fraction, std::uint64_t seed);
DataSplits swap_splits(DataSplits splits);

/// Brings both splits onto the union of their class labels.
void unify_classes(DataSplits& splits);

struct ChannelNormalizer {
    std::vector<double> mean;
    std::vector<double> std;  // population; 0 marks a channel that is passed through

    static ChannelNormalizer fit(const TimeSeriesDataset& train);
    void apply(TimeSeriesDataset& ds) const;
};

/// Fits on train and applies to both splits.
void znormalize(DataSplits& splits);

struct WarpSpec {
    std::size_t events = 3;         // warp events per series
    double max_stretch = 1.5;       // local rate factor drawn from [1, max], inverted half the time
    std::size_t width_min = 8;      // event width range, in samples
    std::size_t width_max = 24;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
    double test_fraction = 0.2;     // share of each class held out
    std::size_t harmonics = 4;      // Fourier terms per prototype
    double separation = 1.0;        // weight of the class-specific shape; 1 gives unrelated prototypes

    void validate(std::size_t length) const;
};

/// Class prototypes sampled at t = 0 .. L-1, classes x L.
std::vector<double> synth_prototypes(std::size_t classes, std::size_t length, const WarpSpec& spec);

/// Monotone map of [0, L-1] onto itself built from the spec's local rate events.
std::vector<double> synth_time_map(std::size_t length, const WarpSpec& spec, std::uint64_t stream);

/*
 * K prototype shapes, per_class examples each. Every example evaluates its
 * prototype at a randomly warped time grid, then adds Gaussian noise. Both
 * splits keep the classes exactly balanced.
 */
DataSplits synth_warped(std::size_t classes, std::size_t length, std::size_t per_class, const WarpSpec& spec);

}  // namespace warpconv

#endif
