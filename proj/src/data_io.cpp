#include "warpconv/data_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace warpconv {

namespace {

std::string at_line(const std::string& source, std::size_t line) {
    return source + ":" + std::to_string(line) + ": ";
}

std::vector<std::string_view> split_fields(std::string_view line, bool commas_only) {
    std::vector<std::string_view> out;
    std::size_t k = 0;
    auto is_sep = [&](char c) { return commas_only ? c == ',' : (c == ',' || c == '\t' || c == ' '); };
    if (commas_only) {
        while (true) {
            const std::size_t next = line.find(',', k);
            out.push_back(line.substr(k, next == std::string_view::npos ? std::string_view::npos : next - k));
            if (next == std::string_view::npos) break;
            k = next + 1;
        }
        for (auto& f : out) {
            while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
            while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.remove_suffix(1);
        }
        return out;
    }
    while (k < line.size()) {
        while (k < line.size() && is_sep(line[k])) ++k;
        if (k >= line.size()) break;
        std::size_t end = k;
        while (end < line.size() && !is_sep(line[end])) ++end;
        out.push_back(line.substr(k, end - k));
        k = end;
    }
    return out;
}

std::optional<double> parse_real(std::string_view field) {
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<long long> parse_integer(std::string_view field) {
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec == std::errc() && ptr == field.data() + field.size()) return v;
    // Accept integral reals such as "1.0", common in UCR exports.
    const auto r = parse_real(field);
    if (r && std::floor(*r) == *r && std::abs(*r) < 9e15) return static_cast<long long>(*r);
    return std::nullopt;
}

std::string format_real(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::vector<std::pair<std::size_t, std::string_view>> numbered_lines(std::string_view text) {
    std::vector<std::pair<std::size_t, std::string_view>> out;
    std::size_t line = 0, k = 0;
    while (k <= text.size()) {
        const std::size_t end = text.find('\n', k);
        std::string_view l = text.substr(k, end == std::string_view::npos ? std::string_view::npos : end - k);
        ++line;
        if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
        const bool blank = l.find_first_not_of(" \t") == std::string_view::npos;
        if (!blank) out.emplace_back(line, l);
        if (end == std::string_view::npos) break;
        k = end + 1;
    }
    return out;
}

struct LabelMapper {
    std::vector<long long> classes;
    bool fixed = false;

    std::size_t index(long long label) const {
        return static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), label) - classes.begin());
    }
    bool known(long long label) const { return std::binary_search(classes.begin(), classes.end(), label); }
};

LabelMapper make_mapper(const LoadOptions& options, const std::vector<long long>& seen) {
    LabelMapper m;
    if (!options.class_labels.empty()) {
        m.classes = options.class_labels;
        std::sort(m.classes.begin(), m.classes.end());
        m.classes.erase(std::unique(m.classes.begin(), m.classes.end()), m.classes.end());
        m.fixed = true;
    } else {
        std::set<long long> s(seen.begin(), seen.end());
        m.classes.assign(s.begin(), s.end());
    }
    return m;
}

TimeSeriesDataset parse_ucr(std::string_view text, const LoadOptions& options, const std::string& source) {
    TimeSeriesDataset ds;
    ds.channels = 1;
    std::vector<long long> raw;
    std::vector<std::size_t> line_of;
    for (const auto& [line, content] : numbered_lines(text)) {
        const auto fields = split_fields(content, false);
        const auto label = parse_integer(fields[0]);
        if (!label) throw DataError(at_line(source, line) + "label '" + std::string(fields[0]) + "' is not an integer");
        const std::size_t n = fields.size() - 1;
        if (n == 0) throw DataError(at_line(source, line) + "example has no samples");
        if (ds.examples == 0) {
            ds.length = n;
        } else if (n != ds.length) {
            throw DataError(at_line(source, line) + "example " + std::to_string(ds.examples) + " has " +
                            std::to_string(n) + " samples, expected " + std::to_string(ds.length) +
                            " (ragged series lengths)");
        }
        for (std::size_t f = 1; f < fields.size(); ++f) {
            const auto v = parse_real(fields[f]);
            if (!v)
                throw DataError(at_line(source, line) + "field " + std::to_string(f + 1) + " '" +
                                std::string(fields[f]) + "' is not a finite number");
            ds.values.push_back(*v);
        }
        raw.push_back(*label);
        line_of.push_back(line);
        ++ds.examples;
    }
    if (ds.examples == 0) throw DataError(source + ": no examples");
    const auto mapper = make_mapper(options, raw);
    for (std::size_t m = 0; m < raw.size(); ++m) {
        if (!mapper.known(raw[m]))
            throw DataError(at_line(source, line_of[m]) + "unknown label " + std::to_string(raw[m]));
        ds.labels.push_back(mapper.index(raw[m]));
    }
    ds.class_labels = mapper.classes;
    return ds;
}

TimeSeriesDataset parse_long(std::string_view text, const LoadOptions& options, const std::string& source) {
    const auto lines = numbered_lines(text);
    if (lines.empty()) throw DataError(source + ": empty file");
    {
        const auto header = split_fields(lines[0].second, true);
        const std::vector<std::string_view> expected{"example", "channel", "t", "value", "label"};
        if (header != expected)
            throw DataError(at_line(source, lines[0].first) + "header must be example,channel,t,value,label");
    }
    struct Sample {
        std::size_t channel, t;
        double value;
        std::size_t line;
    };
    struct Pending {
        long long label;
        std::size_t first_line;
        std::vector<Sample> samples;
    };
    std::map<long long, Pending> by_id;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const auto& [line, content] = lines[k];
        const auto fields = split_fields(content, true);
        if (fields.size() != 5)
            throw DataError(at_line(source, line) + "expected 5 fields, found " + std::to_string(fields.size()));
        const auto id = parse_integer(fields[0]);
        const auto channel = parse_integer(fields[1]);
        const auto t = parse_integer(fields[2]);
        const auto value = parse_real(fields[3]);
        const auto label = parse_integer(fields[4]);
        const char* names[] = {"example", "channel", "t", "value", "label"};
        const bool ok[] = {id.has_value(), channel && *channel >= 0, t && *t >= 0, value.has_value(),
                           label.has_value()};
        for (std::size_t f = 0; f < 5; ++f)
            if (!ok[f])
                throw DataError(at_line(source, line) + names[f] + " field '" + std::string(fields[f]) +
                                "' is not valid");
        auto [it, inserted] = by_id.try_emplace(*id, Pending{*label, line, {}});
        if (!inserted && it->second.label != *label)
            throw DataError(at_line(source, line) + "example " + std::to_string(*id) + " changes label from " +
                            std::to_string(it->second.label) + " to " + std::to_string(*label));
        it->second.samples.push_back(
            {static_cast<std::size_t>(*channel), static_cast<std::size_t>(*t), *value, line});
    }
    if (by_id.empty()) throw DataError(source + ": no examples");

    TimeSeriesDataset ds;
    std::vector<long long> raw;
    std::vector<std::size_t> line_of;
    for (auto& [id, ex] : by_id) {
        std::size_t channels = 0, length = 0;
        for (const auto& s : ex.samples) {
            channels = std::max(channels, s.channel + 1);
            length = std::max(length, s.t + 1);
        }
        if (options.require_channels && channels != *options.require_channels) continue;
        const std::string name = "example " + std::to_string(id);
        if (ds.examples == 0) {
            ds.channels = channels;
            ds.length = length;
        } else if (channels != ds.channels || length != ds.length) {
            throw DataError(at_line(source, ex.first_line) + name + " is " + std::to_string(channels) + "x" +
                            std::to_string(length) + ", expected " + std::to_string(ds.channels) + "x" +
                            std::to_string(ds.length) + " (ragged series lengths)");
        }
        std::vector<double> block(channels * length, 0.0);
        std::vector<char> filled(channels * length, 0);
        for (const auto& s : ex.samples) {
            const std::size_t at = s.channel * length + s.t;
            if (filled[at])
                throw DataError(at_line(source, s.line) + name + " repeats channel " + std::to_string(s.channel) +
                                " t " + std::to_string(s.t));
            filled[at] = 1;
            block[at] = s.value;
        }
        const auto hole = std::find(filled.begin(), filled.end(), 0);
        if (hole != filled.end()) {
            const std::size_t at = static_cast<std::size_t>(hole - filled.begin());
            throw DataError(at_line(source, ex.first_line) + name + " is missing channel " +
                            std::to_string(at / length) + " t " + std::to_string(at % length) +
                            " (ragged series lengths)");
        }
        ds.values.insert(ds.values.end(), block.begin(), block.end());
        raw.push_back(ex.label);
        line_of.push_back(ex.first_line);
        ++ds.examples;
    }
    if (ds.examples == 0) throw DataError(source + ": no examples with the required channel count");
    const auto mapper = make_mapper(options, raw);
    for (std::size_t m = 0; m < raw.size(); ++m) {
        if (!mapper.known(raw[m]))
            throw DataError(at_line(source, line_of[m]) + "unknown label " + std::to_string(raw[m]));
        ds.labels.push_back(mapper.index(raw[m]));
    }
    ds.class_labels = mapper.classes;
    return ds;
}

TimeSeriesDataset subset(const TimeSeriesDataset& ds, const std::vector<std::size_t>& rows) {
    TimeSeriesDataset out;
    out.channels = ds.channels;
    out.length = ds.length;
    out.class_labels = ds.class_labels;
    out.examples = rows.size();
    for (std::size_t m : rows) {
        const auto ex = ds.example(m);
        out.values.insert(out.values.end(), ex.begin(), ex.end());
        out.labels.push_back(ds.labels[m]);
    }
    return out;
}

void remap_labels(TimeSeriesDataset& ds, const std::vector<long long>& classes) {
    for (auto& l : ds.labels) {
        const long long original = ds.class_labels[l];
        l = static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), original) - classes.begin());
    }
    ds.class_labels = classes;
}

}  // namespace

void TimeSeriesDataset::validate() const {
    if (values.size() != examples * channels * length)
        throw DataError("dataset holds " + std::to_string(values.size()) + " values for " + std::to_string(examples) +
                        "x" + std::to_string(channels) + "x" + std::to_string(length));
    if (labels.size() != examples) throw DataError("dataset label count does not match example count");
    for (std::size_t m = 0; m < examples; ++m)
        if (labels[m] >= class_labels.size())
            throw DataError("example " + std::to_string(m) + " has label index " + std::to_string(labels[m]) +
                            " outside " + std::to_string(class_labels.size()) + " classes");
}

bool operator==(const TimeSeriesDataset& a, const TimeSeriesDataset& b) {
    return a.examples == b.examples && a.channels == b.channels && a.length == b.length && a.labels == b.labels &&
           a.class_labels == b.class_labels &&
           std::equal(a.values.begin(), a.values.end(), b.values.begin(), b.values.end(),
                      [](double x, double y) { return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y); });
}

DataFormat parse_data_format(std::string_view text) {
    if (text == "ucr-tsv" || text == "ucr_tsv" || text == "ucr") return DataFormat::UcrTsv;
    if (text == "long-csv" || text == "long_csv" || text == "long") return DataFormat::LongCsv;
    throw std::invalid_argument("unknown data format '" + std::string(text) + "' (expected ucr-tsv|long-csv)");
}

std::string_view to_string(DataFormat format) { return format == DataFormat::UcrTsv ? "ucr-tsv" : "long-csv"; }

TimeSeriesDataset parse_delimited(std::string_view text, DataFormat format, const LoadOptions& options,
                                  const std::string& source) {
    auto ds = format == DataFormat::UcrTsv ? parse_ucr(text, options, source) : parse_long(text, options, source);
    ds.validate();
    return ds;
}

TimeSeriesDataset load_delimited(const std::filesystem::path& path, DataFormat format, const LoadOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_delimited(buf.str(), format, options, path.string());
}

std::string format_delimited(const TimeSeriesDataset& ds, DataFormat format) {
    ds.validate();
    std::string out;
    if (format == DataFormat::UcrTsv) {
        if (ds.channels != 1) throw DataError("ucr-tsv holds univariate series only");
        for (std::size_t m = 0; m < ds.examples; ++m) {
            out += std::to_string(ds.class_labels[ds.labels[m]]);
            for (double v : ds.example(m)) {
                out += '\t';
                out += format_real(v);
            }
            out += '\n';
        }
        return out;
    }
    out = "example,channel,t,value,label\n";
    for (std::size_t m = 0; m < ds.examples; ++m) {
        const std::string tail = "," + std::to_string(ds.class_labels[ds.labels[m]]) + "\n";
        for (std::size_t c = 0; c < ds.channels; ++c) {
            const auto s = ds.series(m, c);
            for (std::size_t t = 0; t < ds.length; ++t)
                out += std::to_string(m) + "," + std::to_string(c) + "," + std::to_string(t) + "," +
                       format_real(s[t]) + tail;
        }
    }
    return out;
}

void write_delimited(const TimeSeriesDataset& ds, const std::filesystem::path& path, DataFormat format) {
    const std::string text = format_delimited(ds, format);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("write failed for " + path.string());
}

void unify_classes(DataSplits& splits) {
    std::set<long long> all(splits.train.class_labels.begin(), splits.train.class_labels.end());
    all.insert(splits.test.class_labels.begin(), splits.test.class_labels.end());
    const std::vector<long long> classes(all.begin(), all.end());
    remap_labels(splits.train, classes);
    remap_labels(splits.test, classes);
}

DataSplits merge_shuffle_split(const DataSplits& splits, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("merge-shuffle-split ratio must lie in (0, 1)");
    if (splits.train.channels != splits.test.channels || splits.train.length != splits.test.length)
        throw DataError("train and test splits have different shapes");
    DataSplits unified = splits;
    unify_classes(unified);
    TimeSeriesDataset merged = unified.train;
    merged.values.insert(merged.values.end(), unified.test.values.begin(), unified.test.values.end());
    merged.labels.insert(merged.labels.end(), unified.test.labels.begin(), unified.test.labels.end());
    merged.examples += unified.test.examples;

    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::size_t>> by_class(merged.class_count());
    for (std::size_t m = 0; m < merged.examples; ++m) by_class[merged.labels[m]].push_back(m);
    std::vector<std::size_t> train_rows, test_rows;
    for (auto& rows : by_class) {
        std::shuffle(rows.begin(), rows.end(), rng);
        const auto keep = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(rows.size())));
        train_rows.insert(train_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(keep));
        test_rows.insert(test_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(keep), rows.end());
    }
    std::shuffle(train_rows.begin(), train_rows.end(), rng);
    std::shuffle(test_rows.begin(), test_rows.end(), rng);
    return {subset(merged, train_rows), subset(merged, test_rows)};
}

DataSplits swap_splits(DataSplits splits) {
    std::swap(splits.train, splits.test);
    return splits;
}

ChannelNormalizer ChannelNormalizer::fit(const TimeSeriesDataset& train) {
    ChannelNormalizer n;
    n.mean.assign(train.channels, 0.0);
    n.std.assign(train.channels, 0.0);
    const double count = static_cast<double>(train.examples * train.length);
    if (count == 0.0) return n;
    for (std::size_t c = 0; c < train.channels; ++c) {
        double sum = 0.0;
        for (std::size_t m = 0; m < train.examples; ++m)
            for (double v : train.series(m, c)) sum += v;
        const double mean = sum / count;
        double sq = 0.0;
        for (std::size_t m = 0; m < train.examples; ++m)
            for (double v : train.series(m, c)) sq += (v - mean) * (v - mean);
        n.mean[c] = mean;
        n.std[c] = std::sqrt(sq / count);
    }
    return n;
}

void ChannelNormalizer::apply(TimeSeriesDataset& ds) const {
    if (ds.channels != mean.size()) throw DataError("normalizer was fitted on a different channel count");
    for (std::size_t m = 0; m < ds.examples; ++m)
        for (std::size_t c = 0; c < ds.channels; ++c) {
            if (std[c] == 0.0) continue;
            double* s = ds.values.data() + (m * ds.channels + c) * ds.length;
            for (std::size_t t = 0; t < ds.length; ++t) s[t] = (s[t] - mean[c]) / std[c];
        }
}

void znormalize(DataSplits& splits) {
    const auto n = ChannelNormalizer::fit(splits.train);
    n.apply(splits.train);
    n.apply(splits.test);
}

// ---------------------------------------------------------------------------
// Synthetic warped series

void WarpSpec::validate(std::size_t length) const {
    if (length < 2) throw std::invalid_argument("synth: series length must be >= 2");
    if (!(max_stretch >= 1.0) || !std::isfinite(max_stretch))
        throw std::invalid_argument("synth: max_stretch must be >= 1");
    if (events > 0) {
        if (width_min == 0 || width_min > width_max)
            throw std::invalid_argument("synth: event widths need 1 <= width_min <= width_max");
        if (width_max > length)
            throw std::invalid_argument("synth: event width " + std::to_string(width_max) +
                                        " exceeds series length " + std::to_string(length));
    }
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("synth: noise sigma must be >= 0");
    if (!(test_fraction >= 0.0 && test_fraction < 1.0))
        throw std::invalid_argument("synth: test fraction must lie in [0, 1)");
    if (harmonics == 0) throw std::invalid_argument("synth: harmonics must be >= 1");
    if (!(separation > 0.0 && separation <= 1.0))
        throw std::invalid_argument("synth: separation must lie in (0, 1]");
}

namespace {

struct Prototype {
    std::vector<double> amplitude, frequency, phase;
    double at(double t, double length) const {
        double s = 0.0;
        for (std::size_t h = 0; h < amplitude.size(); ++h)
            s += amplitude[h] * std::sin(2.0 * std::numbers::pi * frequency[h] * t / length + phase[h]);
        return s;
    }
};

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

// Each prototype mixes a shape shared by all classes with its own shape;
// separation is the weight of the class-specific part.
std::vector<Prototype> make_prototypes(std::size_t classes, const WarpSpec& spec) {
    auto rng = stream_rng(spec.seed, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    auto terms = [&](Prototype& p, double weight) {
        for (std::size_t h = 0; h < spec.harmonics; ++h) {
            const double decay = std::sqrt(static_cast<double>(h + 1));
            const double a = normal(rng);
            const double phi = angle(rng);
            if (weight == 0.0) continue;
            p.amplitude.push_back(weight * a / decay);
            p.frequency.push_back(static_cast<double>(h + 1));
            p.phase.push_back(phi);
        }
    };
    Prototype shared;
    terms(shared, std::sqrt(1.0 - spec.separation * spec.separation));
    std::vector<Prototype> out(classes, shared);
    for (auto& p : out) terms(p, spec.separation);
    return out;
}

}  // namespace

std::vector<double> synth_prototypes(std::size_t classes, std::size_t length, const WarpSpec& spec) {
    spec.validate(length);
    const auto protos = make_prototypes(classes, spec);
    std::vector<double> out;
    for (const auto& p : protos)
        for (std::size_t t = 0; t < length; ++t) out.push_back(p.at(static_cast<double>(t), static_cast<double>(length)));
    return out;
}

std::vector<double> synth_time_map(std::size_t length, const WarpSpec& spec, std::uint64_t stream) {
    spec.validate(length);
    std::vector<double> tau(length);
    for (std::size_t t = 0; t < length; ++t) tau[t] = static_cast<double>(t);
    if (spec.events == 0) return tau;

    auto rng = stream_rng(spec.seed, stream);
    std::vector<double> rate(length - 1, 1.0);  // rate[k] spans [k, k+1]
    std::uniform_int_distribution<std::size_t> width(spec.width_min, spec.width_max);
    std::uniform_real_distribution<double> factor(1.0, spec.max_stretch);
    std::bernoulli_distribution invert(0.5);
    for (std::size_t e = 0; e < spec.events; ++e) {
        const std::size_t w = width(rng);
        const std::size_t start = std::uniform_int_distribution<std::size_t>(0, length - w)(rng);
        double f = factor(rng);
        if (invert(rng)) f = 1.0 / f;
        for (std::size_t k = start; k + 1 < start + w && k < rate.size(); ++k) rate[k] *= f;
    }
    double total = 0.0;
    for (double r : rate) total += r;
    const double scale = static_cast<double>(length - 1) / total;
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < length; ++k) {
        acc += rate[k];
        tau[k + 1] = std::min(acc * scale, static_cast<double>(length - 1));
    }
    tau[length - 1] = static_cast<double>(length - 1);
    return tau;
}

DataSplits synth_warped(std::size_t classes, std::size_t length, std::size_t per_class, const WarpSpec& spec) {
    if (classes < 2) throw std::invalid_argument("synth: classes must be >= 2");
    if (per_class == 0) throw std::invalid_argument("synth: per_class must be >= 1");
    spec.validate(length);
    const auto protos = make_prototypes(classes, spec);
    const auto held_out = static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(per_class)));

    TimeSeriesDataset all;
    all.channels = 1;
    all.length = length;
    for (std::size_t k = 0; k < classes; ++k) all.class_labels.push_back(static_cast<long long>(k));
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t k = 0; k < classes; ++k)
        for (std::size_t i = 0; i < per_class; ++i) {
            const std::uint64_t stream = 1 + k * per_class + i;
            const auto tau = synth_time_map(length, spec, stream);
            auto rng = stream_rng(spec.seed ^ 0x5bd1e995ull, stream);
            for (std::size_t t = 0; t < length; ++t) {
                double v = protos[k].at(tau[t], static_cast<double>(length));
                if (spec.noise_sigma > 0.0) v += spec.noise_sigma * noise(rng);
                all.values.push_back(v);
            }
            all.labels.push_back(k);
            ++all.examples;
        }

    auto rng = stream_rng(spec.seed, 0xfeedull);
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t k = 0; k < classes; ++k) {
        std::vector<std::size_t> rows(per_class);
        for (std::size_t i = 0; i < per_class; ++i) rows[i] = k * per_class + i;
        std::shuffle(rows.begin(), rows.end(), rng);
        test_rows.insert(test_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(held_out));
        train_rows.insert(train_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(held_out), rows.end());
    }
    std::shuffle(train_rows.begin(), train_rows.end(), rng);
    std::shuffle(test_rows.begin(), test_rows.end(), rng);
    return {subset(all, train_rows), subset(all, test_rows)};
}

}  // namespace warpconv
