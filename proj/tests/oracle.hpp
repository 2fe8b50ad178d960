#pragma once

// Brute-force reference implementations used to cross-check the library.
// Deliberately naive: every candidate threshold rebuilds its outlier set
// from scratch and every pair of occurrences is differenced literally.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "ath/core.hpp"

namespace oracle {

struct Result {
    double threshold = 0.0;
    std::size_t outlier_count = 0;
    std::int64_t max_diff_frequency = 0;
};

inline std::int64_t floor_bucket(std::int64_t t, std::int64_t width) {
    return static_cast<std::int64_t>(std::floor(static_cast<double>(t) / static_cast<double>(width)));
}

inline std::vector<std::size_t> outliers(const std::vector<double>& s, double thr, ath::Tail tail) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (tail == ath::Tail::Right ? s[i] > thr : s[i] < thr) out.push_back(i);
    }
    return out;
}

// Pairwise bucket differences among run starts, zero gaps dropped.
inline std::map<std::int64_t, std::int64_t> diff_counts(const std::vector<std::size_t>& idx, std::int64_t start,
                                                        std::int64_t interval, std::int64_t width) {
    std::vector<std::int64_t> buckets;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (k > 0 && idx[k] == idx[k - 1] + 1) continue;
        buckets.push_back(floor_bucket(start + static_cast<std::int64_t>(idx[k]) * interval, width));
    }
    std::map<std::int64_t, std::int64_t> counts;
    for (std::size_t a = 0; a < buckets.size(); ++a)
        for (std::size_t b = a + 1; b < buckets.size(); ++b)
            if (buckets[b] != buckets[a]) ++counts[buckets[b] - buckets[a]];
    return counts;
}

inline std::int64_t max_count(const std::map<std::int64_t, std::int64_t>& m) {
    std::int64_t best = 0;
    for (const auto& kv : m) best = std::max(best, kv.second);
    return best;
}

// Walks `candidates` (already in strict-to-loose order) and returns the last
// one before the first violation.
inline Result walk(const std::vector<double>& s, std::int64_t start, std::int64_t interval,
                   const std::vector<double>& candidates, const ath::ATHConfig& cfg) {
    const std::int64_t width = cfg.granularity.kind == ath::BucketGranularity::Kind::Day
                                   ? 86400
                                   : static_cast<std::int64_t>(cfg.granularity.hours) * 3600;
    Result r;
    bool first = true;
    for (double thr : candidates) {
        const auto out = outliers(s, thr, cfg.tail);
        const auto counts = diff_counts(out, start, interval, width);
        const bool rare = static_cast<double>(out.size()) / static_cast<double>(s.size()) <= cfg.proportion_limit;
        const bool aperiodic = max_count(counts) <= cfg.periodicity_limit;
        if (!(rare && aperiodic)) {
            if (first) r = {thr, out.size(), max_count(counts)};
            break;
        }
        r = {thr, out.size(), max_count(counts)};
        first = false;
    }
    return r;
}

inline std::vector<double> strict_to_loose(std::vector<double> v, ath::Tail tail) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    if (tail == ath::Tail::Right) std::reverse(v.begin(), v.end());
    return v;
}

inline Result ath(const std::vector<double>& s, std::int64_t start, std::int64_t interval,
                  const ath::ATHConfig& cfg) {
    return walk(s, start, interval, strict_to_loose(s, cfg.tail), cfg);
}

// Inclusive linear-interpolation quantile on an unsorted copy.
inline double quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace oracle
