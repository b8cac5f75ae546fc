#include <CLI11.hpp>
#include <iostream>

#include "warpconv/commands.hpp"

#ifdef WARPCONV_FAULTY_SOLVER
namespace {
// Test-only build: perturbs every solve so the oracle check must fail.
warpconv::SolveResult faulty_solve(const warpconv::ProductMatrix& d, warpconv::NormalizationMode mode,
                                   warpconv::BandConfig band) {
    auto r = warpconv::solve(d, mode, band);
    r.optimal_cost += 1e-6 * (1.0 + std::abs(r.optimal_cost));
    return r;
}
}  // namespace
#endif

int main(int argc, char** argv) {
    CLI::App app{"warpconv: DTW-aligned 1-D convolution experiments"};
    app.require_subcommand(1);

    std::string config;
    auto* train = app.add_subcommand("train", "train one experiment (or sweep) from a config file");
    train->add_option("--config", config, "key = value experiment file")->required();

    std::string weights, input, mode = "x-onto-w";
    std::size_t r = 1;
    auto* inspect = app.add_subcommand("inspect-path", "print the optimal path and U* for one filter and window");
    inspect->add_option("--weights", weights, "file with the filter values")->required();
    inspect->add_option("--input", input, "file with the window values")->required();
    inspect->add_option("--mode", mode, "symmetric | x-onto-w | w-onto-x");
    inspect->add_option("--r", r, "band radius");

    warpconv::OracleCheckOptions oracle;
    std::string radii = "0,1,2,3";
    auto* check = app.add_subcommand("oracle-check", "compare the solver with exhaustive enumeration");
    check->add_option("--max-n", oracle.max_n, "largest dimension");
    check->add_option("--r", radii, "comma-separated band radii");
    check->add_option("--trials", oracle.trials, "random pairs per (n, r, mode)");
    check->add_option("--seed", oracle.seed, "random seed");

    std::string spec, out_dir;
    auto* synth = app.add_subcommand("synth", "write a synthetic warped dataset");
    synth->add_option("--spec", spec, "file of synth.* keys")->required();
    synth->add_option("--out", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : warpconv::kExitConfig;
    }

    if (*train) return warpconv::cmd_train(config, std::cout, std::cerr);
    if (*inspect) return warpconv::cmd_inspect_path(weights, input, mode, r, std::cout, std::cerr);
    if (*synth) return warpconv::cmd_synth(spec, out_dir, std::cout, std::cerr);
    if (*check) {
        oracle.radii.clear();
        try {
            for (const auto& item : warpconv::split_list(radii)) oracle.radii.push_back(std::stoul(item));
        } catch (const std::exception&) {
            std::cerr << "config error: --r expects a comma-separated list of integers\n";
            return warpconv::kExitConfig;
        }
#ifdef WARPCONV_FAULTY_SOLVER
        return warpconv::cmd_oracle_check(oracle, std::cout, std::cerr, faulty_solve);
#else
        return warpconv::cmd_oracle_check(oracle, std::cout, std::cerr);
#endif
    }
    return warpconv::kExitConfig;
}
