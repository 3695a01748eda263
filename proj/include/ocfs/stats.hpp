#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace ocfs::stats {

// Median with the usual midpoint convention for even lengths. Empty input
// returns 0; callers are expected to reject empty samples first.
inline double median(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    std::vector<double> v(xs.begin(), xs.end());
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return lower + (upper - lower) / 2.0;
}

inline double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Population standard deviation. Deviations are taken from the first element
// before the usual two-pass formula, so a sample of identical values yields
// exactly 0 regardless of rounding in the mean.
inline double stddev(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double ref = xs.front();
    double sum = 0.0;
    for (double x : xs) sum += x - ref;
    const double shift = sum / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) {
        const double d = (x - ref) - shift;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(xs.size()));
}

// Sample (n - 1) standard deviation, same shifting trick.
inline double sample_stddev(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double n = static_cast<double>(xs.size());
    return stddev(xs) * std::sqrt(n / (n - 1.0));
}

}  // namespace ocfs::stats
