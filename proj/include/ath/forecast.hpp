#pragma once

// Seasonal forecasters producing expected values so that residuals can be
// scored. The seasonal model keeps per (weekday, time-of-day slot) quartiles
// and forecasts the bucket median.

#include <array>
#include <string>
#include <vector>

#include "ath/core.hpp"
#include "ath/stats.hpp"

namespace ath {

inline constexpr int kDaysPerWeek = 7;

/// UTC day of week, Monday = 0. The epoch fell on a Thursday.
constexpr int day_of_week(Timestamp t) {
    const std::int64_t day = floor_div(t, kSecondsPerDay);
    return static_cast<int>(((day + 3) % 7 + 7) % 7);
}

/// Slot width used when none is configured: the sampling interval rounded up
/// to whole hours.
inline Duration default_slot_duration(Duration interval) {
    if (interval <= 0) throw ConfigError("interval must be positive");
    return ((interval + kSecondsPerHour - 1) / kSecondsPerHour) * kSecondsPerHour;
}

class SeasonalQuartileModel {
public:
    struct Window {
        Timestamp start = 0;
        Timestamp end = 0;  // exclusive
    };

    SeasonalQuartileModel() = default;

    Duration slot_duration() const { return slot_duration_; }
    int slots_per_day() const { return static_cast<int>(kSecondsPerDay / slot_duration_); }
    const Window& fitted_on() const { return fitted_on_; }

    int slot_of(Timestamp t) const {
        const std::int64_t sec = t - floor_div(t, kSecondsPerDay) * kSecondsPerDay;
        return static_cast<int>(sec / slot_duration_);
    }

    const stats::Quartiles& bucket(int dow, int slot) const {
        return buckets_.at(static_cast<std::size_t>(dow * slots_per_day() + slot));
    }

    const stats::Quartiles& bucket_at(Timestamp t) const { return bucket(day_of_week(t), slot_of(t)); }

    double forecast(Timestamp t) const { return bucket_at(t).median; }

    friend SeasonalQuartileModel fit_seasonal_quartile(const TimeSeries& train, Duration slot_duration);

private:
    Duration slot_duration_ = kSecondsPerHour;
    Window fitted_on_;
    std::vector<stats::Quartiles> buckets_;
};

inline std::string bucket_name(int dow, int slot, Duration slot_duration) {
    static constexpr std::array<const char*, 7> names{"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};
    const Duration sec = slot * slot_duration;
    return std::string(names[static_cast<std::size_t>(dow)]) + " " + std::to_string(sec / 3600) + ":" +
           (sec % 3600 / 60 < 10 ? "0" : "") + std::to_string(sec % 3600 / 60);
}

inline SeasonalQuartileModel fit_seasonal_quartile(const TimeSeries& train, Duration slot_duration) {
    if (slot_duration <= 0 || kSecondsPerDay % slot_duration != 0)
        throw ConfigError("slot duration must divide 24h, got " + std::to_string(slot_duration) + "s");
    if (train.span() < kDaysPerWeek * kSecondsPerDay)
        throw DataError("seasonal fit needs at least 7 days of data, got " +
                        std::to_string(static_cast<double>(train.span()) / kSecondsPerDay) + " days");

    SeasonalQuartileModel m;
    m.slot_duration_ = slot_duration;
    m.fitted_on_ = {train.axis.start, train.end()};
    const int slots = m.slots_per_day();
    std::vector<std::vector<double>> groups(static_cast<std::size_t>(kDaysPerWeek * slots));
    for (std::size_t i = 0; i < train.size(); ++i) {
        const Timestamp t = train.timestamp_of(i);
        groups[static_cast<std::size_t>(day_of_week(t) * slots + m.slot_of(t))].push_back(train.values[i]);
    }
    m.buckets_.reserve(groups.size());
    for (std::size_t b = 0; b < groups.size(); ++b) {
        if (groups[b].empty())
            throw DataError("seasonal fit: empty bucket " +
                            bucket_name(static_cast<int>(b) / slots, static_cast<int>(b) % slots, slot_duration));
        m.buckets_.push_back(stats::quartiles(groups[b]));
    }
    return m;
}

inline double forecast(const SeasonalQuartileModel& model, Timestamp t) { return model.forecast(t); }

/// value - forecast on the series' own time axis.
inline TimeSeries residuals(const TimeSeries& series, const SeasonalQuartileModel& model) {
    TimeSeries out{series.axis, std::vector<double>(series.size())};
    for (std::size_t i = 0; i < series.size(); ++i)
        out.values[i] = series.values[i] - model.forecast(series.timestamp_of(i));
    return out;
}

/// Persistence forecast: each point is predicted by its predecessor, the
/// first by itself.
inline TimeSeries naive_forecast(const TimeSeries& series) {
    if (series.empty()) throw DataError("naive_forecast: empty series");
    TimeSeries out{series.axis, std::vector<double>(series.size())};
    out.values[0] = series.values[0];
    for (std::size_t i = 1; i < series.size(); ++i) out.values[i] = series.values[i - 1];
    return out;
}

inline TimeSeries naive_residuals(const TimeSeries& series) {
    const TimeSeries f = naive_forecast(series);
    TimeSeries out{series.axis, std::vector<double>(series.size())};
    for (std::size_t i = 0; i < series.size(); ++i) out.values[i] = series.values[i] - f.values[i];
    return out;
}

}  // namespace ath
