#pragma once

// Order statistics used across the project. Quantiles interpolate linearly
// between order statistics (position p * (n - 1)), the inclusive rule.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace ath::stats {

/// Quantile of already sorted data.
inline double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty data");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level outside [0, 1]");
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0) return sorted[lo];
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::span<const double> data, double p) {
    std::vector<double> tmp(data.begin(), data.end());
    std::sort(tmp.begin(), tmp.end());
    return quantile_sorted(tmp, p);
}

struct Quartiles {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;

    double iqr() const { return q3 - q1; }
};

inline Quartiles quartiles(std::span<const double> data) {
    std::vector<double> tmp(data.begin(), data.end());
    std::sort(tmp.begin(), tmp.end());
    return {quantile_sorted(tmp, 0.25), quantile_sorted(tmp, 0.5), quantile_sorted(tmp, 0.75)};
}

inline double median(std::span<const double> data) { return quantile(data, 0.5); }

inline double iqr(std::span<const double> data) { return quartiles(data).iqr(); }

inline double mean(std::span<const double> data) {
    if (data.empty()) throw std::invalid_argument("mean of empty data");
    return std::accumulate(data.begin(), data.end(), 0.0) / static_cast<double>(data.size());
}

/// Population standard deviation, two-pass.
inline double population_stddev(std::span<const double> data, double mu) {
    if (data.empty()) throw std::invalid_argument("stddev of empty data");
    double ss = 0.0;
    for (double x : data) ss += (x - mu) * (x - mu);
    return std::sqrt(ss / static_cast<double>(data.size()));
}

}  // namespace ath::stats
