#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "warpconv/data_io.hpp"

using namespace warpconv;

namespace {

std::string error_of(const std::string& text, DataFormat format, const LoadOptions& options = {}) {
    try {
        parse_delimited(text, format, options, "f");
    } catch (const DataError& e) {
        return e.what();
    }
    return {};
}

TimeSeriesDataset random_dataset(std::mt19937_64& rng, std::size_t m, std::size_t c, std::size_t l) {
    TimeSeriesDataset ds;
    ds.examples = m;
    ds.channels = c;
    ds.length = l;
    ds.class_labels = {-1, 3, 7};
    std::normal_distribution<double> normal(0.0, 10.0);
    for (std::size_t k = 0; k < m * c * l; ++k) ds.values.push_back(normal(rng));
    for (std::size_t k = 0; k < m; ++k) ds.labels.push_back(k % 3);
    return ds;
}

}  // namespace

TEST_CASE("ucr-tsv parsing") {
    const auto ds = parse_delimited("0\t1\t2\t3\t4\n1\t0.5\t-1\t2e-3\t7\n", DataFormat::UcrTsv);
    CHECK(ds.examples == 2);
    CHECK(ds.channels == 1);
    CHECK(ds.length == 4);
    CHECK(ds.labels == std::vector<std::size_t>{0, 1});
    CHECK(ds.series(1, 0)[2] == 2e-3);

    // Labels are remapped in ascending order of their original values.
    const auto remapped = parse_delimited("5,1,2\n-2,3,4\n5,0,0\n", DataFormat::UcrTsv);
    CHECK(remapped.class_labels == std::vector<long long>{-2, 5});
    CHECK(remapped.labels == std::vector<std::size_t>{1, 0, 1});
    const auto integral = parse_delimited("1.0 4 5\n2.0 6 7\n", DataFormat::UcrTsv);
    CHECK(integral.class_labels == std::vector<long long>{1, 2});
}

TEST_CASE("ucr-tsv errors carry line numbers") {
    CHECK(error_of("0\t1\t2\n\n1\t1\t2\t3\n", DataFormat::UcrTsv).find("f:3:") == 0);
    CHECK(error_of("0\t1\t2\n1\t1\t2\t3\n", DataFormat::UcrTsv).find("ragged") != std::string::npos);
    CHECK(error_of("0\t1\tx\n", DataFormat::UcrTsv).find("f:1: field 3 'x'") == 0);
    CHECK(error_of("a\t1\t2\n", DataFormat::UcrTsv).find("label") != std::string::npos);
    CHECK(error_of("0\t1\tnan\n", DataFormat::UcrTsv).find("not a finite number") != std::string::npos);

    LoadOptions known;
    known.class_labels = {0, 1};
    CHECK(error_of("0\t1\n1\t2\n2\t3\n", DataFormat::UcrTsv, known).find("f:3: unknown label 2") == 0);
    CHECK(!error_of("", DataFormat::UcrTsv).empty());
}

TEST_CASE("long-csv parsing") {
    const std::string text =
        "example,channel,t,value,label\n"
        "0,0,0,1,4\n0,0,1,2,4\n0,0,2,3,4\n"
        "0,1,0,10,4\n0,1,1,20,4\n0,1,2,30,4\n";
    const auto ds = parse_delimited(text, DataFormat::LongCsv);
    CHECK(ds.examples == 1);
    CHECK(ds.channels == 2);
    CHECK(ds.length == 3);
    CHECK(ds.values == std::vector<double>{1, 2, 3, 10, 20, 30});
    CHECK(ds.class_labels == std::vector<long long>{4});

    // Row order does not matter.
    const auto shuffled = parse_delimited(
        "example,channel,t,value,label\n0,1,2,30,4\n0,0,0,1,4\n0,1,0,10,4\n0,0,2,3,4\n0,1,1,20,4\n0,0,1,2,4\n",
        DataFormat::LongCsv);
    CHECK(shuffled == ds);
}

TEST_CASE("long-csv errors") {
    const std::string header = "example,channel,t,value,label\n";
    const auto ragged = error_of(header + "0,0,0,1,0\n0,0,1,1,0\n1,0,0,1,1\n", DataFormat::LongCsv);
    CHECK(ragged.find("example 1") != std::string::npos);
    CHECK(ragged.find("ragged") != std::string::npos);
    CHECK(ragged.find("f:4:") == 0);
    CHECK(error_of(header + "0,0,1,1,0\n", DataFormat::LongCsv).find("missing channel 0 t 0") != std::string::npos);
    CHECK(error_of(header + "0,0,0,1,0\n0,0,0,2,0\n", DataFormat::LongCsv).find("f:3:") == 0);
    CHECK(error_of(header + "0,0,0,abc,0\n", DataFormat::LongCsv).find("f:2: value") == 0);
    CHECK(error_of(header + "0,0,0,1,0\n0,0,1,1,1\n", DataFormat::LongCsv).find("changes label") != std::string::npos);
    CHECK(error_of("id,channel,t,value,label\n", DataFormat::LongCsv).find("header") != std::string::npos);
    CHECK(error_of(header + "0,0,0,1\n", DataFormat::LongCsv).find("expected 5 fields") != std::string::npos);
}

TEST_CASE("channel-count predicate filters long-csv examples") {
    const std::string text =
        "example,channel,t,value,label\n"
        "0,0,0,1,0\n0,1,0,1,0\n"
        "1,0,0,2,1\n"
        "2,0,0,3,1\n2,1,0,3,1\n";
    LoadOptions opts;
    opts.require_channels = 2;
    const auto ds = parse_delimited(text, DataFormat::LongCsv, opts);
    CHECK(ds.examples == 2);
    CHECK(ds.values == std::vector<double>{1, 1, 3, 3});
    opts.require_channels = 5;
    CHECK_THROWS_AS(parse_delimited(text, DataFormat::LongCsv, opts), DataError);
}

TEST_CASE("writers round-trip through the loaders") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const auto uni = random_dataset(rng, 7, 1, 5 + trial);
        const std::string text = format_delimited(uni, DataFormat::UcrTsv);
        const auto back = parse_delimited(text, DataFormat::UcrTsv);
        CHECK(back == uni);
        CHECK(format_delimited(back, DataFormat::UcrTsv) == text);

        const auto multi = random_dataset(rng, 4, 1 + trial % 3, 3 + trial % 4);
        const std::string long_text = format_delimited(multi, DataFormat::LongCsv);
        const auto long_back = parse_delimited(long_text, DataFormat::LongCsv);
        CHECK(long_back == multi);
        CHECK(format_delimited(long_back, DataFormat::LongCsv) == long_text);
    }
    // Extra whitespace and alternate separators normalize away.
    const std::string canonical = "1\t0.5\t2\n2\t-3\t4\n";
    CHECK(format_delimited(parse_delimited("1  0.5,2\r\n\n2\t-3 \t 4\n", DataFormat::UcrTsv), DataFormat::UcrTsv) ==
          canonical);

    const auto dir = std::filesystem::temp_directory_path() / "warpconv_test_io";
    std::filesystem::create_directories(dir);
    const auto ds = random_dataset(rng, 3, 2, 4);
    write_delimited(ds, dir / "a.csv", DataFormat::LongCsv);
    CHECK(load_delimited(dir / "a.csv", DataFormat::LongCsv) == ds);
    CHECK_THROWS_AS(load_delimited(dir / "missing.csv", DataFormat::LongCsv), DataError);
    CHECK_THROWS_AS(format_delimited(ds, DataFormat::UcrTsv), DataError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("z-normalization") {
    std::mt19937_64 rng(10);
    DataSplits s{random_dataset(rng, 30, 3, 10), random_dataset(rng, 10, 3, 10)};
    for (std::size_t m = 0; m < 30; ++m)
        for (double& v : std::span<double>(s.train.values.data() + (m * 3 + 1) * 10, 10)) v = 4.25;
    const auto test_before = s.test;
    znormalize(s);
    const auto n = ChannelNormalizer::fit(s.train);
    for (std::size_t c : {0u, 2u}) {
        CHECK(std::abs(n.mean[c]) <= 1e-9);
        CHECK(std::abs(n.std[c] - 1.0) <= 1e-9);
    }
    // Constant channel passes through untouched, on both splits.
    CHECK(n.std[1] == 0.0);
    CHECK(s.train.series(3, 1)[4] == 4.25);
    CHECK(s.test.series(2, 1)[0] == test_before.series(2, 1)[0]);

    // Reapplying to already-normalized data is the identity up to rounding.
    auto again = s;
    znormalize(again);
    const auto n2 = ChannelNormalizer::fit(again.train);
    CHECK(std::abs(n2.mean[0]) <= 1e-9);
    CHECK(std::abs(n2.std[0] - 1.0) <= 1e-9);

    // The test split uses train statistics, so its own need not be standard.
    const auto nt = ChannelNormalizer::fit(s.test);
    CHECK(std::abs(nt.mean[0]) > 1e-6);
}

TEST_CASE("merge-shuffle-split and swap") {
    std::mt19937_64 rng(12);
    DataSplits s{random_dataset(rng, 12, 1, 4), random_dataset(rng, 6, 1, 4)};
    s.test.class_labels = {3, 7, 9};  // test references a class absent from train
    const auto a = merge_shuffle_split(s, 0.5, 3);
    const auto b = merge_shuffle_split(s, 0.5, 3);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    CHECK(a.train.examples + a.test.examples == 18);
    CHECK(a.train.class_labels == std::vector<long long>{-1, 3, 7, 9});
    CHECK(a.train.class_labels == a.test.class_labels);
    const auto c = merge_shuffle_split(s, 0.5, 4);
    CHECK_FALSE(c.train == a.train);
    CHECK_THROWS_AS(merge_shuffle_split(s, 1.0, 1), std::invalid_argument);

    const auto swapped = swap_splits(s);
    CHECK(swapped.train == s.test);
    CHECK(swapped.test == s.train);
}

TEST_CASE("synthetic generator") {
    WarpSpec spec;
    spec.events = 0;
    spec.noise_sigma = 0.0;
    spec.seed = 4;
    const auto identity = synth_warped(3, 40, 10, spec);
    const auto protos = synth_prototypes(3, 40, spec);
    for (const auto* split : {&identity.train, &identity.test})
        for (std::size_t m = 0; m < split->examples; ++m) {
            const auto ex = split->example(m);
            CHECK(std::equal(ex.begin(), ex.end(), protos.begin() + static_cast<std::ptrdiff_t>(split->labels[m] * 40)));
        }

    WarpSpec warped;
    warped.events = 3;
    warped.max_stretch = 1.5;
    warped.noise_sigma = 0.1;
    warped.seed = 9;
    const auto a = synth_warped(4, 64, 25, warped);
    const auto b = synth_warped(4, 64, 25, warped);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    CHECK(a.train.examples == 80);
    CHECK(a.test.examples == 20);
    CHECK(a.train.length == 64);
    for (const auto* split : {&a.train, &a.test}) {
        std::vector<std::size_t> per(4, 0);
        for (auto l : split->labels) ++per[l];
        CHECK(per == std::vector<std::size_t>(4, split->examples / 4));
    }
    warped.seed = 10;
    CHECK_FALSE(synth_warped(4, 64, 25, warped).train == a.train);

    WarpSpec bad = warped;
    bad.width_max = 65;
    CHECK_THROWS_AS(synth_warped(4, 64, 5, bad), std::invalid_argument);
    bad = warped;
    bad.max_stretch = 0.9;
    CHECK_THROWS_AS(synth_warped(4, 64, 5, bad), std::invalid_argument);
    CHECK_THROWS_AS(synth_warped(1, 64, 5, warped), std::invalid_argument);
}

TEST_CASE("time maps are monotone and keep both ends") {
    WarpSpec spec;
    spec.events = 5;
    spec.max_stretch = 2.0;
    spec.width_min = 3;
    spec.width_max = 30;
    for (std::uint64_t stream = 0; stream < 200; ++stream) {
        spec.seed = stream * 7;
        const std::size_t length = 16 + stream % 50;
        spec.width_max = std::min<std::size_t>(30, length);
        const auto tau = synth_time_map(length, spec, stream);
        CHECK(tau.front() == 0.0);
        CHECK(tau.back() == static_cast<double>(length - 1));
        for (std::size_t t = 1; t < length; ++t) CHECK(tau[t] > tau[t - 1]);
    }
    spec.max_stretch = 1.0;
    const auto flat = synth_time_map(50, spec, 1);
    for (std::size_t t = 0; t < 50; ++t) CHECK(flat[t] == doctest::Approx(static_cast<double>(t)).epsilon(1e-12));
}
