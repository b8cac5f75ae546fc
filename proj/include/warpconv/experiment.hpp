#ifndef WARPCONV_EXPERIMENT_HPP
#define WARPCONV_EXPERIMENT_HPP

#include <iosfwd>
#include <optional>

#include "warpconv/config.hpp"

namespace warpconv {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitData = 2, kExitNumeric = 3, kExitOracle = 4 };

struct MetricRow {
    std::uint64_t iteration = 0;
    std::string split;  // "train" (mini-batch averages since the previous row) or "test"
    double loss = 0.0;
    double accuracy = 0.0;
};

struct ArmResult {
    std::string arm;
    std::vector<MetricRow> rows;
    std::vector<std::optional<nn::WindowStats>> windows;
    std::size_t parameter_count = 0;
};

/// Loads or generates both splits and applies the configured preparation steps.
DataSplits load_experiment_data(const ExperimentConfig& config);

nn::Tensor to_tensor(const TimeSeriesDataset& ds);

/// Trains one arm. When dir is set, writes metrics.csv and checkpoints there.
ArmResult run_arm(const ExperimentConfig& config, const DataSplits& data,
                  const std::optional<std::filesystem::path>& dir, std::ostream* log = nullptr);

/// Runs every arm of the config (one unless a sweep is set) and writes
/// config.copy, summary.csv and the per-arm outputs under output.dir.
std::vector<ArmResult> run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

std::string format_metrics_csv(const std::vector<MetricRow>& rows);
std::vector<MetricRow> parse_metrics_csv(std::string_view text);
std::string format_summary_csv(const std::vector<nn::MetricWindow>& windows, const std::vector<ArmResult>& arms);

/// Test-split accuracy records of a metrics table, in iteration order.
std::vector<nn::AccuracyRecord> test_history(const std::vector<MetricRow>& rows);

std::string default_arm_name(const ExperimentConfig& config);

}  // namespace warpconv

#endif
