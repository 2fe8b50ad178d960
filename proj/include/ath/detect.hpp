#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "ath/core.hpp"
#include "ath/stats.hpp"
#include "ath/thresholding.hpp"

namespace ath {

/// Mean and population standard deviation of a residual window.
struct ZScoreModel {
    double mu = 0.0;
    double sigma = 0.0;

    double score(double x) const { return (x - mu) / sigma; }
    /// Residual value that maps to score `z`.
    double residual_of(double z) const { return mu + z * sigma; }

    friend bool operator==(const ZScoreModel&, const ZScoreModel&) = default;
};

class DegenerateWindowError : public DataError {
public:
    DegenerateWindowError() : DataError("degenerate window: zero standard deviation") {}
};

inline ZScoreModel fit_zscore(std::span<const double> residuals) {
    if (residuals.size() < 2) throw DataError("fit_zscore: need at least 2 points");
    const double mu = stats::mean(residuals);
    return {mu, stats::population_stddev(residuals, mu)};
}

inline ZScoreModel fit_zscore(const TimeSeries& residuals) { return fit_zscore(residuals.values); }

inline ScoreSeries score_zscore(const ZScoreModel& model, const TimeSeries& residuals) {
    if (!(model.sigma > 0.0)) throw DegenerateWindowError();
    ScoreSeries out{residuals.axis, std::vector<double>(residuals.size())};
    for (std::size_t i = 0; i < residuals.size(); ++i) out.scores[i] = model.score(residuals.values[i]);
    return out;
}

/// Peaks past the initial empirical quantile, strictest first, with the
/// quantile itself appended as the loosest candidate.
inline std::vector<double> pot_candidates(std::span<const double> scores, double initial_quantile, Tail tail) {
    if (scores.size() < 10) throw DataError("pot_candidates: need at least 10 scores");
    if (!(initial_quantile > 0.0 && initial_quantile < 1.0))
        throw ConfigError("pot initial quantile must lie in (0, 1)");
    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());
    const double level = tail == Tail::Right ? initial_quantile : 1.0 - initial_quantile;
    const double q = stats::quantile_sorted(sorted, level);

    std::vector<double> peaks;
    for (double s : sorted) {
        if (beyond(s, q, tail)) peaks.push_back(s);
    }
    auto out = tail_sorted_unique(peaks, tail);
    out.push_back(q);
    return out;
}

inline std::vector<double> pot_candidates(const ScoreSeries& scores, double initial_quantile, Tail tail) {
    return pot_candidates(std::span<const double>(scores.scores), initial_quantile, tail);
}

}  // namespace ath
