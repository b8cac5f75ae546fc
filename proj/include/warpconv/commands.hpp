#ifndef WARPCONV_COMMANDS_HPP
#define WARPCONV_COMMANDS_HPP

#include <filesystem>
#include <functional>
#include <iosfwd>

#include "warpconv/experiment.hpp"
#include "warpconv/warp_solver.hpp"

namespace warpconv {

/// Every command returns a process exit code and reports failures on err.
int cmd_train(const std::filesystem::path& config, std::ostream& out, std::ostream& err);

int cmd_inspect_path(const std::filesystem::path& weights, const std::filesystem::path& input,
                     const std::string& mode, std::size_t r, std::ostream& out, std::ostream& err);

using SolverFn = std::function<SolveResult(const ProductMatrix&, NormalizationMode, BandConfig)>;

struct OracleCheckOptions {
    std::size_t max_n = 8;
    std::vector<std::size_t> radii{0, 1, 2, 3};
    std::size_t trials = 50;
    std::uint64_t seed = 0;
    double tolerance = 1e-9;  // relative
};

/// Compares `solver` with exhaustive enumeration for n in [1, max_n].
int cmd_oracle_check(const OracleCheckOptions& options, std::ostream& out, std::ostream& err,
                     const SolverFn& solver = solve);

/// Writes train.tsv, test.tsv and prototypes.tsv for a synth.* spec file.
int cmd_synth(const std::filesystem::path& spec, const std::filesystem::path& out_dir, std::ostream& out,
              std::ostream& err);

/// Reads reals separated by commas, tabs, spaces or newlines.
std::vector<double> read_vector_file(const std::filesystem::path& path);

}  // namespace warpconv

#endif
