#pragma once

// Streaming detection for one KPI stream: forecaster -> residuals -> Z-Score
// -> two-tailed adaptive thresholds, with periodic drift checks that trigger
// threshold recomputation. Each stage keeps its own sliding window.

#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ath/core.hpp"
#include "ath/detect.hpp"
#include "ath/drift.hpp"
#include "ath/forecast.hpp"
#include "ath/stats.hpp"
#include "ath/thresholding.hpp"

namespace ath {

enum class ForecasterKind { SeasonalQuartile, Naive };
enum class ScorerKind { ZScore };

struct CandidateSource {
    enum class Kind { AllScores, PotPeaks };

    Kind kind = Kind::AllScores;
    double initial_quantile = 0.98;

    friend bool operator==(const CandidateSource&, const CandidateSource&) = default;
};

struct PipelineConfig {
    Duration forecaster_window = 28 * kSecondsPerDay;
    Duration detector_window = 7 * kSecondsPerDay;
    std::size_t drift_check_every = 96;  // points; 0 disables drift checks
    ForecasterKind forecaster = ForecasterKind::SeasonalQuartile;
    Duration slot_duration = 0;  // 0: derived from the series interval
    ScorerKind scorer = ScorerKind::ZScore;
    CandidateSource candidates;
    ATHConfig ath_left{.tail = Tail::Left};
    ATHConfig ath_right{.tail = Tail::Right};
    double shrink_factor = 0.5;
    bool weekly_refit = false;

    void validate() const {
        if (detector_window <= 0) throw ConfigError("detector_window must be positive");
        if (forecaster_window < detector_window) throw ConfigError("forecaster_window must be >= detector_window");
        if (ath_left.tail != Tail::Left) throw ConfigError("ath_left must use the left tail");
        if (ath_right.tail != Tail::Right) throw ConfigError("ath_right must use the right tail");
        ath_left.validate();
        ath_right.validate();
        if (!(shrink_factor > 0.0 && shrink_factor < 1.0)) throw ConfigError("shrink_factor must lie in (0, 1)");
        if (slot_duration < 0 || (slot_duration > 0 && kSecondsPerDay % slot_duration != 0))
            throw ConfigError("slot_duration must divide 24h");
        if (candidates.kind == CandidateSource::Kind::PotPeaks &&
            !(candidates.initial_quantile > 0.0 && candidates.initial_quantile < 1.0))
            throw ConfigError("pot initial quantile must lie in (0, 1)");
    }
};

struct PointVerdict {
    Timestamp timestamp = 0;
    double value = 0.0;
    double residual = 0.0;
    double score = 0.0;
    AnomalyLabel label = AnomalyLabel::Normal;
    double left_threshold = 0.0;
    double right_threshold = 0.0;
    // The same thresholds mapped back to residual units through the scorer.
    double left_residual_threshold = 0.0;
    double right_residual_threshold = 0.0;
    std::optional<DriftStatus> drift_event;
};

/// Thresholds for one tail from the configured candidate source.
inline ThresholdDecision decide_threshold(const ScoreSeries& scores, const ATHConfig& cfg,
                                          const CandidateSource& source) {
    if (source.kind == CandidateSource::Kind::PotPeaks && scores.size() >= 10) {
        const auto cands = pot_candidates(scores, source.initial_quantile, cfg.tail);
        return apply_ath_with_candidates(scores, cands, cfg);
    }
    return apply_ath(scores, cfg);
}

class PipelineState {
public:
    static PipelineState warm_up(const TimeSeries& history, const PipelineConfig& cfg, std::string stream_id = {}) {
        cfg.validate();
        PipelineState s;
        s.cfg_ = cfg;
        s.stream_id_ = std::move(stream_id);
        s.interval_ = history.axis.interval;
        if (history.empty() || history.axis.interval <= 0) throw DataError(s.prefix() + "empty history");

        s.forecaster_points_ = static_cast<std::size_t>(cfg.forecaster_window / s.interval_);
        s.detector_points_ = static_cast<std::size_t>(cfg.detector_window / s.interval_);
        if (s.detector_points_ < 2) throw ConfigError("detector_window must cover at least 2 points");
        if (cfg.drift_check_every > s.detector_points_)
            throw ConfigError("drift_check_every must not exceed the detector window");
        if (history.size() < s.forecaster_points_)
            throw DataError(s.prefix() + "insufficient history: need " + std::to_string(cfg.forecaster_window) +
                            " s (" + std::to_string(s.forecaster_points_) + " points), got " +
                            std::to_string(history.span()) + " s");

        const std::size_t n = history.size();
        const std::size_t f0 = n - s.forecaster_points_;
        s.forecaster_start_ = history.timestamp_of(f0);
        s.forecaster_values_.assign(history.values.begin() + static_cast<std::ptrdiff_t>(f0), history.values.end());
        s.last_value_ = history.values.back();
        s.next_ts_ = history.end();
        s.refit_forecaster();

        // Detector stage: residuals of the trailing detector window.
        const std::size_t d0 = n - s.detector_points_;
        s.detector_start_ = history.timestamp_of(d0);
        for (std::size_t i = d0; i < n; ++i) {
            const double prev = i > 0 ? history.values[i - 1] : history.values[i];
            s.det_residuals_.push_back(s.residual_for(history.timestamp_of(i), history.values[i], prev));
        }
        s.fit_detector_stage();
        s.baseline_ = {stats::iqr(s.residual_window().values), cfg.shrink_factor};
        return s;
    }

    PointVerdict step(Timestamp t, double value) {
        if (t != next_ts_)
            throw DataError(prefix() + "expected timestamp " + std::to_string(next_ts_) + ", got " +
                            std::to_string(t));
        if (!std::isfinite(value)) throw DataError(prefix() + "non-finite value at " + std::to_string(t));

        PointVerdict v;
        v.timestamp = t;
        v.value = value;
        v.residual = residual_for(t, value, last_value_);
        v.score = scorer_.score(v.residual);
        v.left_threshold = left_.threshold;
        v.right_threshold = right_.threshold;
        v.left_residual_threshold = scorer_.residual_of(left_.threshold);
        v.right_residual_threshold = scorer_.residual_of(right_.threshold);
        v.label = merge_label(v.score, left_.threshold, right_.threshold);

        forecaster_values_.push_back(value);
        if (forecaster_values_.size() > forecaster_points_) {
            forecaster_values_.pop_front();
            forecaster_start_ += interval_;
        }
        det_residuals_.push_back(v.residual);
        det_scores_.push_back(v.score);
        if (det_residuals_.size() > detector_points_) {
            det_residuals_.pop_front();
            det_scores_.pop_front();
            detector_start_ += interval_;
        }
        last_value_ = value;
        next_ts_ += interval_;

        if (cfg_.drift_check_every > 0 && ++since_check_ == cfg_.drift_check_every) {
            since_check_ = 0;
            v.drift_event = check_drift();
        }
        if (cfg_.weekly_refit && ++since_refit_ == static_cast<std::size_t>(7 * kSecondsPerDay / interval_)) {
            since_refit_ = 0;
            refit_forecaster();
        }
        return v;
    }

    const PipelineConfig& config() const { return cfg_; }
    const std::string& stream_id() const { return stream_id_; }
    const ThresholdDecision& left() const { return left_; }
    const ThresholdDecision& right() const { return right_; }
    const ZScoreModel& scorer() const { return scorer_; }
    const RangeBaseline& baseline() const { return baseline_; }
    const std::optional<SeasonalQuartileModel>& seasonal_model() const { return seasonal_; }
    Timestamp next_timestamp() const { return next_ts_; }
    double last_value() const { return last_value_; }
    std::size_t forecaster_window_size() const { return forecaster_values_.size(); }
    std::size_t detector_window_size() const { return det_residuals_.size(); }
    std::size_t forecaster_capacity() const { return forecaster_points_; }
    std::size_t detector_capacity() const { return detector_points_; }

    double forecast(Timestamp t, double previous_value) const {
        return seasonal_ ? seasonal_->forecast(t) : previous_value;
    }

    TimeSeries residual_window() const {
        return {{detector_start_, interval_}, {det_residuals_.begin(), det_residuals_.end()}};
    }
    ScoreSeries score_window() const {
        return {{detector_start_, interval_}, {det_scores_.begin(), det_scores_.end()}};
    }

private:
    PipelineState() = default;

    std::string prefix() const { return stream_id_.empty() ? std::string() : "stream " + stream_id_ + ": "; }

    double residual_for(Timestamp t, double value, double previous_value) const {
        return value - forecast(t, previous_value);
    }

    void refit_forecaster() {
        if (cfg_.forecaster != ForecasterKind::SeasonalQuartile) return;
        const Duration slot = cfg_.slot_duration > 0 ? cfg_.slot_duration : default_slot_duration(interval_);
        TimeSeries window{{forecaster_start_, interval_}, {forecaster_values_.begin(), forecaster_values_.end()}};
        try {
            seasonal_ = fit_seasonal_quartile(window, slot);
        } catch (const DataError& e) {
            throw DataError(prefix() + e.what());
        }
    }

    // Fits the scorer on the detector residuals and recomputes both tails.
    void fit_detector_stage() {
        const TimeSeries res = residual_window();
        const ZScoreModel m = fit_zscore(res);
        if (!(m.sigma > 0.0)) throw DataError(prefix() + "degenerate window: zero standard deviation");
        scorer_ = m;
        const ScoreSeries sc = score_zscore(scorer_, res);
        det_scores_.assign(sc.scores.begin(), sc.scores.end());
        left_ = decide_threshold(sc, cfg_.ath_left, cfg_.candidates);
        right_ = decide_threshold(sc, cfg_.ath_right, cfg_.candidates);
    }

    std::optional<DriftStatus> check_drift() {
        if (baseline_provisional_ && det_residuals_.size() == detector_points_) {
            baseline_.iqr_at_fit = stats::iqr(residual_window().values);
            baseline_provisional_ = false;
        }
        const ScoreSeries live_scores = score_window();
        const std::size_t k = std::min(cfg_.drift_check_every, det_residuals_.size());
        const TimeSeries all_res = residual_window();
        const TimeSeries live_res = all_res.slice(all_res.size() - k, k);

        RangeBaseline effective = baseline_;
        if (baseline_provisional_) effective.iqr_at_fit = 0.0;

        const DriftStatus right = observe_window(live_scores, live_res, right_, cfg_.ath_right, effective);
        const DriftStatus left = observe_window(live_scores, live_res, left_, cfg_.ath_left, effective);
        using K = DriftStatus::Kind;

        if (right.kind == K::ConstraintViolation || left.kind == K::ConstraintViolation) {
            if (right.kind == K::ConstraintViolation)
                right_ = decide_threshold(live_scores, cfg_.ath_right, cfg_.candidates);
            if (left.kind == K::ConstraintViolation)
                left_ = decide_threshold(live_scores, cfg_.ath_left, cfg_.candidates);
            return right.kind == K::ConstraintViolation ? right : left;
        }
        if (right.kind == K::RangeShrink) {
            shrink_to_recent(k);
            return right;
        }
        return std::nullopt;
    }

    // The spread collapsed: the older part of the detector window belongs to
    // the previous regime. Keep only the recent segment, refit forecaster and
    // scorer, and recompute both thresholds on it.
    void shrink_to_recent(std::size_t k) {
        while (det_residuals_.size() > k) {
            det_residuals_.pop_front();
            det_scores_.pop_front();
            detector_start_ += interval_;
        }
        refit_forecaster();
        const std::size_t nf = forecaster_values_.size();
        for (std::size_t j = 0; j < k; ++j) {
            const std::size_t i = nf - k + j;
            const double prev = i > 0 ? forecaster_values_[i - 1] : forecaster_values_[i];
            det_residuals_[j] = residual_for(detector_start_ + static_cast<Timestamp>(j) * interval_,
                                             forecaster_values_[i], prev);
        }
        const TimeSeries res = residual_window();
        const ZScoreModel m = fit_zscore(res);
        if (m.sigma > 0.0) scorer_ = m;
        const ScoreSeries sc = score_zscore(scorer_, res);
        det_scores_.assign(sc.scores.begin(), sc.scores.end());
        left_ = decide_threshold(sc, cfg_.ath_left, cfg_.candidates);
        right_ = decide_threshold(sc, cfg_.ath_right, cfg_.candidates);
        baseline_.iqr_at_fit = stats::iqr(res.values);
        baseline_provisional_ = true;
    }

    PipelineConfig cfg_;
    std::string stream_id_;
    Duration interval_ = 900;
    Timestamp next_ts_ = 0;
    std::size_t forecaster_points_ = 0;
    std::size_t detector_points_ = 0;

    std::optional<SeasonalQuartileModel> seasonal_;
    double last_value_ = 0.0;
    ZScoreModel scorer_;
    ThresholdDecision left_;
    ThresholdDecision right_;
    RangeBaseline baseline_;
    bool baseline_provisional_ = false;

    Timestamp forecaster_start_ = 0;
    std::deque<double> forecaster_values_;
    Timestamp detector_start_ = 0;
    std::deque<double> det_residuals_;
    std::deque<double> det_scores_;
    std::size_t since_check_ = 0;
    std::size_t since_refit_ = 0;
};

inline PipelineState warm_up(const TimeSeries& history, const PipelineConfig& cfg, std::string stream_id = {}) {
    return PipelineState::warm_up(history, cfg, std::move(stream_id));
}

inline PointVerdict step(PipelineState& state, Timestamp t, double value) { return state.step(t, value); }

/// Streams every point of `span` through the state.
inline std::vector<PointVerdict> run_stream(PipelineState& state, const TimeSeries& span) {
    std::vector<PointVerdict> out;
    out.reserve(span.size());
    for (std::size_t i = 0; i < span.size(); ++i) out.push_back(state.step(span.timestamp_of(i), span.values[i]));
    return out;
}

/// One-shot labelling of `test` with the models fitted on `history` and no
/// drift handling: forecast, score and threshold the whole span at once.
inline Labels batch_detect(const TimeSeries& history, const TimeSeries& test, const PipelineConfig& cfg) {
    const PipelineState fitted = warm_up(history, cfg);
    TimeSeries res;
    if (fitted.seasonal_model()) {
        res = residuals(test, *fitted.seasonal_model());
    } else {
        TimeSeries joined{test.axis, {history.values.back()}};
        joined.values.insert(joined.values.end(), test.values.begin(), test.values.end());
        res = naive_residuals(joined).slice(1, test.size());
        res.axis = test.axis;
    }
    const ScoreSeries sc = score_zscore(fitted.scorer(), res);
    return merge_labels(sc.scores, fitted.left().threshold, fitted.right().threshold);
}

}  // namespace ath
