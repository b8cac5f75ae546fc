#include "warpconv/nn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace warpconv::nn {

std::vector<std::optional<WindowStats>> metric_windows(std::span<const AccuracyRecord> history,
                                                       std::span<const MetricWindow> windows) {
    for (std::size_t k = 1; k < history.size(); ++k)
        if (history[k].iteration < history[k - 1].iteration)
            throw std::invalid_argument("metric_windows: history is not sorted by iteration");

    std::vector<std::optional<WindowStats>> out;
    out.reserve(windows.size());
    for (const auto& w : windows) {
        if (w.end < w.start) throw std::invalid_argument("metric_windows: window end precedes start");
        WindowStats s;
        double sum = 0.0;
        for (const auto& rec : history)
            if (rec.iteration >= w.start && rec.iteration <= w.end) {
                sum += rec.accuracy;
                s.max = s.count == 0 ? rec.accuracy : std::max(s.max, rec.accuracy);
                ++s.count;
            }
        if (s.count == 0) {
            out.emplace_back(std::nullopt);
            continue;
        }
        s.mean = sum / static_cast<double>(s.count);
        double sq = 0.0;
        for (const auto& rec : history)
            if (rec.iteration >= w.start && rec.iteration <= w.end) sq += (rec.accuracy - s.mean) * (rec.accuracy - s.mean);
        s.std = std::sqrt(sq / static_cast<double>(s.count));
        out.emplace_back(s);
    }
    return out;
}

}  // namespace warpconv::nn
