#include "warpconv/commands.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "warpconv/nn/checkpoint.hpp"

namespace warpconv {

namespace {

std::string real_text(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

std::vector<double> read_vector_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    std::vector<double> out;
    std::size_t k = 0, line = 1;
    auto sep = [](char c) { return c == ',' || c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (k < text.size()) {
        if (sep(text[k])) {
            if (text[k] == '\n') ++line;
            ++k;
            continue;
        }
        std::size_t end = k;
        while (end < text.size() && !sep(text[end])) ++end;
        double v = 0.0;
        const char* first = text.data() + k + (text[k] == '+' ? 1 : 0);
        const auto [ptr, ec] = std::from_chars(first, text.data() + end, v);
        if (ec != std::errc() || ptr != text.data() + end || !std::isfinite(v))
            throw DataError(path.string() + ":" + std::to_string(line) + ": '" + text.substr(k, end - k) +
                            "' is not a finite number");
        out.push_back(v);
        k = end;
    }
    if (out.empty()) throw DataError(path.string() + ": no values");
    return out;
}

int cmd_train(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err) {
    ExperimentConfig config;
    try {
        config = load_experiment_config(config_path);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        const auto arms = run_experiment(config, &out);
        for (const auto& arm : arms)
            out << "arm " << arm.arm << ": " << arm.parameter_count << " parameters, outputs in "
                << config.output_dir.string() << "\n";
        return kExitOk;
    } catch (const nn::SpecError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const nn::NumericError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const nn::CheckpointError& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::invalid_argument& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    }
}

int cmd_inspect_path(const std::filesystem::path& weights, const std::filesystem::path& input,
                     const std::string& mode_text, std::size_t r, std::ostream& out, std::ostream& err) {
    NormalizationMode mode;
    try {
        mode = parse_normalization(mode_text);
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    std::vector<double> w, x;
    try {
        w = read_vector_file(weights);
        x = read_vector_file(input);
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    }
    if (w.size() != x.size()) {
        err << "data error: weights have " << w.size() << " values but input has " << x.size() << "\n";
        return kExitData;
    }
    const auto result = solve(product_matrix(w, x), mode, BandConfig{r});
    out << "cost," << real_text(result.optimal_cost) << "\n";
    out << "path," << format_path(result.optimal_path) << "\n";
    out << "u_star\n";
    const std::size_t n = w.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) out << (j ? "," : "") << real_text(result.u_star(i, j));
        out << "\n";
    }
    return kExitOk;
}

int cmd_oracle_check(const OracleCheckOptions& options, std::ostream& out, std::ostream& err,
                     const SolverFn& solver) {
    if (options.max_n == 0 || options.max_n > kOracleCap) {
        err << "config error: --max-n must lie in [1, " << kOracleCap << "]\n";
        return kExitConfig;
    }
    if (options.radii.empty() || options.trials == 0) {
        err << "config error: need at least one radius and one trial\n";
        return kExitConfig;
    }
    const NormalizationMode modes[] = {NormalizationMode::Symmetric, NormalizationMode::XOntoW,
                                       NormalizationMode::WOntoX};
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::size_t failures = 0, total = 0;
    out << "n,r,mode,trials,mismatches,max_rel_error,result\n";
    for (std::size_t n = 1; n <= options.max_n; ++n)
        for (std::size_t r : options.radii)
            for (auto mode : modes) {
                std::size_t bad = 0;
                double worst = 0.0;
                for (std::size_t t = 0; t < options.trials; ++t) {
                    std::vector<double> w(n), x(n);
                    for (auto& v : w) v = normal(rng);
                    for (auto& v : x) v = normal(rng);
                    const auto d = product_matrix(w, x);
                    const double fast = solver(d, mode, BandConfig{r}).optimal_cost;
                    const double exact = solve_bruteforce(d, mode, BandConfig{r}).optimal_cost;
                    const double rel = std::abs(fast - exact) / std::max(1.0, std::abs(exact));
                    worst = std::max(worst, rel);
                    if (!(rel <= options.tolerance)) ++bad;
                }
                total += options.trials;
                failures += bad;
                out << n << "," << r << "," << to_string(mode) << "," << options.trials << "," << bad << ","
                    << std::setprecision(3) << worst << std::setprecision(6) << "," << (bad ? "FAIL" : "PASS")
                    << "\n";
            }
    out << (failures ? "FAIL" : "PASS") << ": " << failures << " mismatches in " << total << " solves\n";
    if (failures) {
        err << "oracle mismatch: " << failures << " of " << total << " solves disagree with enumeration\n";
        return kExitOracle;
    }
    return kExitOk;
}

int cmd_synth(const std::filesystem::path& spec_path, const std::filesystem::path& out_dir, std::ostream& out,
              std::ostream& err) {
    DataSource src;
    try {
        std::ifstream in(spec_path, std::ios::binary);
        if (!in) throw ConfigError("cannot open spec " + spec_path.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        src = parse_synth_spec(buf.str(), spec_path.string());
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        const auto splits = synth_warped(src.synth_classes, src.synth_length, src.synth_per_class, src.warp);
        std::filesystem::create_directories(out_dir);
        write_delimited(splits.train, out_dir / "train.tsv", DataFormat::UcrTsv);
        write_delimited(splits.test, out_dir / "test.tsv", DataFormat::UcrTsv);
        TimeSeriesDataset protos;
        protos.channels = 1;
        protos.length = src.synth_length;
        protos.examples = src.synth_classes;
        protos.values = synth_prototypes(src.synth_classes, src.synth_length, src.warp);
        for (std::size_t k = 0; k < src.synth_classes; ++k) {
            protos.labels.push_back(k);
            protos.class_labels.push_back(static_cast<long long>(k));
        }
        write_delimited(protos, out_dir / "prototypes.tsv", DataFormat::UcrTsv);
        out << "wrote " << splits.train.examples << " train and " << splits.test.examples << " test series to "
            << out_dir.string() << "\n";
        return kExitOk;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    }
}

}  // namespace warpconv
