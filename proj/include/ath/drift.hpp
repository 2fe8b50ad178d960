#pragma once

// Window-level drift checks. A standing threshold that produces a rare-and-
// aperiodic violation on live data should be raised; a residual spread that
// collapsed well below the one seen at fit time should bring it down.

#include <optional>
#include <span>

#include "ath/core.hpp"
#include "ath/stats.hpp"
#include "ath/thresholding.hpp"

namespace ath {

struct RangeBaseline {
    double iqr_at_fit = 0.0;
    double shrink_factor = 0.5;

    void validate() const {
        if (!(iqr_at_fit >= 0.0)) throw ConfigError("iqr_at_fit must be >= 0");
        if (!(shrink_factor > 0.0 && shrink_factor < 1.0)) throw ConfigError("shrink_factor must lie in (0, 1)");
    }
};

struct DriftStatus {
    enum class Kind { None, ConstraintViolation, RangeShrink };

    Kind kind = Kind::None;
    std::optional<ConstraintStatus> constraint;  // ConstraintViolation only
    std::optional<double> range_ratio;           // RangeShrink only
    std::optional<Tail> tail;                    // ConstraintViolation only
    Timestamp at = 0;

    bool triggered() const { return kind != Kind::None; }
};

inline const char* to_string(DriftStatus::Kind k) {
    switch (k) {
        case DriftStatus::Kind::ConstraintViolation: return "constraint_violation";
        case DriftStatus::Kind::RangeShrink: return "range_shrink";
        default: return "none";
    }
}

/// Labels `live_scores` with the standing threshold and checks, in priority
/// order, the thresholding constraints and the residual spread.
inline DriftStatus observe_window(const ScoreSeries& live_scores, const TimeSeries& live_residuals,
                                  const ThresholdDecision& decision, const ATHConfig& cfg,
                                  const RangeBaseline& baseline) {
    if (live_scores.empty() || live_residuals.empty()) throw DataError("observe_window: empty window");
    const Timestamp at = live_scores.axis.timestamp_of(live_scores.size() - 1);

    std::vector<std::size_t> flagged;
    for (std::size_t i = 0; i < live_scores.size(); ++i) {
        if (beyond(live_scores.scores[i], decision.threshold, decision.tail)) flagged.push_back(i);
    }
    ATHConfig effective = cfg;
    effective.tail = decision.tail;
    const ConstraintStatus st = check_constraints(flagged, live_scores.size(), live_scores.axis, effective);
    if (!st.ok()) {
        DriftStatus d;
        d.kind = DriftStatus::Kind::ConstraintViolation;
        d.constraint = st;
        d.tail = decision.tail;
        d.at = at;
        return d;
    }

    if (baseline.iqr_at_fit > 0.0) {
        const double ratio = stats::iqr(live_residuals.values) / baseline.iqr_at_fit;
        if (ratio < baseline.shrink_factor) {
            DriftStatus d;
            d.kind = DriftStatus::Kind::RangeShrink;
            d.range_ratio = ratio;
            d.at = at;
            return d;
        }
    }
    return DriftStatus{};
}

}  // namespace ath
