#pragma once

// Adaptive thresholding: walk candidate thresholds from the strictest to the
// most permissive and keep the last one whose outlier set is still rare and
// aperiodic.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "ath/core.hpp"

namespace ath {

struct ThresholdDecision {
    double threshold = 0.0;
    Tail tail = Tail::Right;
    std::size_t outlier_count = 0;
    double outlier_fraction = 0.0;
    std::int64_t max_diff_frequency = 0;
    std::size_t candidates_examined = 0;
    // False only when the very first candidate already violates the
    // constraints, which cannot happen when candidates are the scores.
    bool constraints_met = true;

    friend bool operator==(const ThresholdDecision&, const ThresholdDecision&) = default;
};

struct DiffFrequency {
    std::int64_t diff = 0;
    std::int64_t count = 0;

    friend bool operator==(const DiffFrequency&, const DiffFrequency&) = default;
};

struct ConstraintStatus {
    bool proportion_ok = true;
    bool periodicity_ok = true;
    std::optional<DiffFrequency> violating_diff;  // set iff !periodicity_ok
    std::int64_t max_diff_frequency = 0;

    bool ok() const { return proportion_ok && periodicity_ok; }
};

using DiffHistogram = std::map<std::int64_t, std::int64_t>;

/// True when `s` lies strictly past `threshold` on the given tail.
constexpr bool beyond(double s, double threshold, Tail tail) {
    return tail == Tail::Right ? s > threshold : s < threshold;
}

/// First index of every maximal run of consecutive integers.
inline std::vector<std::size_t> collapse_consecutive_runs(std::span<const std::size_t> indices) {
    std::vector<std::size_t> reps;
    for (std::size_t k = 0; k < indices.size(); ++k) {
        if (k == 0 || indices[k] != indices[k - 1] + 1) reps.push_back(indices[k]);
    }
    return reps;
}

/// Frequency of every positive pairwise bucket difference among the given
/// occurrences. Same-bucket pairs are not counted.
inline DiffHistogram temporal_diff_histogram(std::span<const std::size_t> indices, TimeAxis axis,
                                             BucketGranularity g) {
    // Pairwise differences factor through per-bucket occupancy counts.
    std::map<std::int64_t, std::int64_t> per_bucket;
    for (std::size_t i : indices) ++per_bucket[bucket_index(axis.timestamp_of(i), g)];

    DiffHistogram hist;
    for (auto a = per_bucket.begin(); a != per_bucket.end(); ++a) {
        for (auto b = std::next(a); b != per_bucket.end(); ++b)
            hist[b->first - a->first] += a->second * b->second;
    }
    return hist;
}

inline ConstraintStatus check_constraints(std::span<const std::size_t> outlier_indices, std::size_t n,
                                          TimeAxis axis, const ATHConfig& cfg) {
    ConstraintStatus st;
    if (n == 0) return st;
    st.proportion_ok =
        !(static_cast<double>(outlier_indices.size()) / static_cast<double>(n) > cfg.proportion_limit);

    std::vector<std::size_t> sorted(outlier_indices.begin(), outlier_indices.end());
    std::sort(sorted.begin(), sorted.end());
    const auto reps = collapse_consecutive_runs(sorted);
    const auto hist = temporal_diff_histogram(reps, axis, cfg.granularity);

    std::optional<DiffFrequency> worst;
    for (const auto& [diff, count] : hist) {
        st.max_diff_frequency = std::max(st.max_diff_frequency, count);
        if (count > cfg.periodicity_limit && (!worst || count > worst->count)) worst = DiffFrequency{diff, count};
    }
    st.periodicity_ok = !worst.has_value();
    st.violating_diff = worst;
    return st;
}

inline Labels label_anomalies(std::span<const double> scores, double threshold, Tail tail) {
    const AnomalyLabel hit = tail == Tail::Right ? AnomalyLabel::Right : AnomalyLabel::Left;
    Labels out(scores.size(), AnomalyLabel::Normal);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (beyond(scores[i], threshold, tail)) out[i] = hit;
    }
    return out;
}

inline Labels label_anomalies(const ScoreSeries& scores, double threshold, Tail tail) {
    return label_anomalies(std::span<const double>(scores.scores), threshold, tail);
}

/// Deduplicated values ordered from strictest to loosest for the tail:
/// descending for Right, ascending for Left.
inline std::vector<double> tail_sorted_unique(std::span<const double> values, Tail tail) {
    std::vector<double> out(values.begin(), values.end());
    if (tail == Tail::Right)
        std::sort(out.begin(), out.end(), std::greater<>());
    else
        std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace detail {

// Maintains the run representatives of a growing outlier set together with
// the pairwise bucket-difference histogram, so each added point costs
// O(occupied buckets) instead of a full recount.
class PeriodicityTracker {
public:
    PeriodicityTracker(std::size_t n, TimeAxis axis, BucketGranularity g, std::int64_t limit)
        : in_set_(n, 0), bucket_(n), limit_(limit) {
        const std::int64_t base = n ? bucket_index(axis.timestamp_of(0), g) : 0;
        for (std::size_t i = 0; i < n; ++i) bucket_[i] = bucket_index(axis.timestamp_of(i), g) - base;
        const std::size_t span = n ? static_cast<std::size_t>(bucket_[n - 1]) + 1 : 1;
        bucket_count_.assign(span, 0);
        slot_.assign(span, kNoSlot);
        hist_.assign(span, 0);
    }

    void add(std::size_t i) {
        const bool left = i > 0 && in_set_[i - 1];
        const bool right = i + 1 < in_set_.size() && in_set_[i + 1];
        in_set_[i] = 1;
        if (!left && !right) {
            add_rep(bucket_[i]);
        } else if (!left && right) {
            remove_rep(bucket_[i + 1]);
            add_rep(bucket_[i]);
        } else if (left && right) {
            remove_rep(bucket_[i + 1]);
        }
    }

    void remove(std::size_t i) {
        in_set_[i] = 0;
        const bool left = i > 0 && in_set_[i - 1];
        const bool right = i + 1 < in_set_.size() && in_set_[i + 1];
        if (!left && !right) {
            remove_rep(bucket_[i]);
        } else if (!left && right) {
            remove_rep(bucket_[i]);
            add_rep(bucket_[i + 1]);
        } else if (left && right) {
            add_rep(bucket_[i + 1]);
        }
    }

    bool periodic() const { return over_limit_ > 0; }

    std::int64_t max_frequency() const {
        std::int64_t m = 0;
        for (std::int64_t c : hist_) m = std::max(m, c);
        return m;
    }

private:
    static constexpr std::size_t kNoSlot = static_cast<std::size_t>(-1);

    void bump(std::int64_t diff, std::int64_t delta) {
        auto& h = hist_[static_cast<std::size_t>(diff)];
        const bool was_over = h > limit_;
        h += delta;
        const bool is_over = h > limit_;
        if (is_over && !was_over) ++over_limit_;
        if (was_over && !is_over) --over_limit_;
    }

    void add_rep(std::int64_t b) {
        for (std::int64_t other : occupied_) {
            if (other != b) bump(std::abs(other - b), bucket_count_[static_cast<std::size_t>(other)]);
        }
        auto& c = bucket_count_[static_cast<std::size_t>(b)];
        if (c++ == 0) {
            slot_[static_cast<std::size_t>(b)] = occupied_.size();
            occupied_.push_back(b);
        }
    }

    void remove_rep(std::int64_t b) {
        auto& c = bucket_count_[static_cast<std::size_t>(b)];
        if (--c == 0) {
            const std::size_t pos = slot_[static_cast<std::size_t>(b)];
            const std::int64_t last = occupied_.back();
            occupied_[pos] = last;
            slot_[static_cast<std::size_t>(last)] = pos;
            occupied_.pop_back();
            slot_[static_cast<std::size_t>(b)] = kNoSlot;
        }
        for (std::int64_t other : occupied_) {
            if (other != b) bump(std::abs(other - b), -bucket_count_[static_cast<std::size_t>(other)]);
        }
    }

    std::vector<std::uint8_t> in_set_;
    std::vector<std::int64_t> bucket_;
    std::vector<std::int64_t> bucket_count_;
    std::vector<std::size_t> slot_;
    std::vector<std::int64_t> occupied_;
    std::vector<std::int64_t> hist_;
    std::int64_t limit_;
    std::int64_t over_limit_ = 0;
};

inline std::vector<std::size_t> tail_order(std::span<const double> scores, Tail tail) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (tail == Tail::Right) {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
        });
    } else {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return scores[a] < scores[b] || (scores[a] == scores[b] && a < b);
        });
    }
    return order;
}

inline ThresholdDecision run_ath(const ScoreSeries& s, std::span<const std::size_t> order,
                                 std::span<const double> thresholds, const ATHConfig& cfg) {
    const std::size_t n = s.size();
    const auto& scores = s.scores;
    PeriodicityTracker tracker(n, s.axis, cfg.granularity, cfg.periodicity_limit);

    double previous = thresholds.front();
    std::size_t previous_count = 0;
    std::size_t taken = 0;
    std::size_t examined = 0;
    bool broke = false;
    std::vector<std::size_t> step_added;

    for (double thr : thresholds) {
        ++examined;
        step_added.clear();
        while (taken < n && beyond(scores[order[taken]], thr, cfg.tail)) {
            tracker.add(order[taken]);
            step_added.push_back(order[taken]);
            ++taken;
        }
        const bool too_many = static_cast<double>(taken) / static_cast<double>(n) > cfg.proportion_limit;
        if (too_many || tracker.periodic()) {
            broke = true;
            break;
        }
        previous = thr;
        previous_count = taken;
    }

    ThresholdDecision d;
    d.threshold = previous;
    d.tail = cfg.tail;
    d.candidates_examined = examined;
    if (broke && examined > 1) {
        for (auto it = step_added.rbegin(); it != step_added.rend(); ++it) tracker.remove(*it);
    } else if (broke) {
        previous_count = taken;
        d.constraints_met = false;
    }
    d.outlier_count = previous_count;
    d.outlier_fraction = static_cast<double>(previous_count) / static_cast<double>(n);
    d.max_diff_frequency = tracker.max_frequency();
    return d;
}

}  // namespace detail

/// Most permissive threshold among the unique scores whose outlier set stays
/// within both limits, stopping at the first violation.
inline ThresholdDecision apply_ath(const ScoreSeries& scores, const ATHConfig& cfg) {
    if (scores.empty()) throw DataError("apply_ath: empty scores");
    cfg.validate();
    const auto order = detail::tail_order(scores.scores, cfg.tail);
    std::vector<double> thresholds;
    thresholds.reserve(scores.size());
    for (std::size_t i : order) {
        const double v = scores.scores[i];
        if (thresholds.empty() || thresholds.back() != v) thresholds.push_back(v);
    }
    return detail::run_ath(scores, order, thresholds, cfg);
}

/// Same walk over an explicit candidate list (deduplicated and tail-sorted
/// here).
inline ThresholdDecision apply_ath_with_candidates(const ScoreSeries& scores, std::span<const double> candidates,
                                                   const ATHConfig& cfg) {
    if (scores.empty()) throw DataError("apply_ath: empty scores");
    if (candidates.empty()) throw DataError("apply_ath: empty candidate list");
    cfg.validate();
    for (double c : candidates) {
        if (!std::isfinite(c)) throw DataError("apply_ath: non-finite candidate threshold");
    }
    const auto thresholds = tail_sorted_unique(candidates, cfg.tail);
    const auto order = detail::tail_order(scores.scores, cfg.tail);
    return detail::run_ath(scores, order, thresholds, cfg);
}

/// Per-point merge of the two tails. When both fire on one point the tail
/// with the larger distance to its threshold wins; exact ties go right.
inline AnomalyLabel merge_label(double s, double left_threshold, double right_threshold) {
    const bool l = s < left_threshold;
    const bool r = s > right_threshold;
    if (l && r) return std::abs(s - left_threshold) > std::abs(s - right_threshold) ? AnomalyLabel::Left
                                                                                      : AnomalyLabel::Right;
    if (l) return AnomalyLabel::Left;
    if (r) return AnomalyLabel::Right;
    return AnomalyLabel::Normal;
}

inline Labels merge_labels(std::span<const double> scores, double left_threshold, double right_threshold) {
    Labels out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = merge_label(scores[i], left_threshold, right_threshold);
    return out;
}

struct TwoTailedResult {
    ThresholdDecision left;
    ThresholdDecision right;
    Labels labels;
};

inline TwoTailedResult two_tailed_thresholds(const ScoreSeries& scores, const ATHConfig& left_cfg,
                                             const ATHConfig& right_cfg) {
    if (left_cfg.tail != Tail::Left || right_cfg.tail != Tail::Right)
        throw ConfigError("two_tailed_thresholds: expected a left-tail and a right-tail config");
    TwoTailedResult r;
    r.left = apply_ath(scores, left_cfg);
    r.right = apply_ath(scores, right_cfg);
    r.labels = merge_labels(scores.scores, r.left.threshold, r.right.threshold);
    return r;
}

}  // namespace ath
