#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <span>
#include <vector>

namespace spbench {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Robust summary of a set of repeated timings.
struct TimingSummary {
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
    /// Median absolute deviation from the median.
    double mad = 0.0;
};

inline double median_of(std::vector<double> v)
{
    if (v.empty()) {
        return 0.0;
    }
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline TimingSummary summarize(std::span<const double> times)
{
    TimingSummary s;
    if (times.empty()) {
        return s;
    }
    std::vector<double> v(times.begin(), times.end());
    s.median = median_of(v);
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    s.min = *lo;
    s.max = *hi;
    for (auto& t : v) {
        t = std::fabs(t - s.median);
    }
    s.mad = median_of(std::move(v));
    return s;
}

}  // namespace spbench
