#ifndef WARPCONV_NN_METRICS_HPP
#define WARPCONV_NN_METRICS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace warpconv::nn {

struct AccuracyRecord {
    std::uint64_t iteration = 0;
    double accuracy = 0.0;
};

struct MetricWindow {
    std::uint64_t start = 0;
    std::uint64_t end = 0;  // inclusive
};

struct WindowStats {
    double mean = 0.0;
    double std = 0.0;  // population
    double max = 0.0;
    std::size_t count = 0;
};

/// Statistics of the accuracies with start <= iteration <= end; empty windows are absent.
std::vector<std::optional<WindowStats>> metric_windows(std::span<const AccuracyRecord> history,
                                                       std::span<const MetricWindow> windows);

}  // namespace warpconv::nn

#endif
