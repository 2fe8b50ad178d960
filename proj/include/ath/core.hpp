#pragma once

// Domain types shared by every stage: the regular time axis, score series,
// tails, time bucketing and the thresholding configuration.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ath {

using Timestamp = std::int64_t;  // UTC epoch seconds
using Duration = std::int64_t;   // seconds

inline constexpr Duration kSecondsPerHour = 3600;
inline constexpr Duration kSecondsPerDay = 86400;

/// Raised for invalid configuration values.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised for malformed or inconsistent input data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a series fails validation. Carries the kind and the first
/// offending index.
class SeriesError : public DataError {
public:
    enum class Kind { Empty, NonPositiveInterval, NonFinite };

    SeriesError(Kind kind, std::size_t index, const std::string& what)
        : DataError(what), kind_(kind), index_(index) {}

    Kind kind() const noexcept { return kind_; }
    std::size_t index() const noexcept { return index_; }

private:
    Kind kind_;
    std::size_t index_;
};

/// Floor division that rounds toward negative infinity.
constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

/// Start and spacing of an equally spaced series.
struct TimeAxis {
    Timestamp start = 0;
    Duration interval = 900;

    constexpr Timestamp timestamp_of(std::size_t i) const {
        return start + static_cast<Timestamp>(i) * interval;
    }

    friend constexpr bool operator==(const TimeAxis&, const TimeAxis&) = default;
};

/// Equally spaced observations without gaps. Construct through
/// validate_series() to get the invariants checked.
struct TimeSeries {
    TimeAxis axis;
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    bool empty() const noexcept { return values.empty(); }
    Timestamp timestamp_of(std::size_t i) const { return axis.timestamp_of(i); }
    Timestamp end() const { return axis.timestamp_of(values.size()); }
    Duration span() const { return static_cast<Duration>(values.size()) * axis.interval; }

    /// Points [first, first + count) as a new series on the same grid.
    TimeSeries slice(std::size_t first, std::size_t count) const {
        TimeSeries out;
        out.axis = {axis.timestamp_of(first), axis.interval};
        out.values.assign(values.begin() + static_cast<std::ptrdiff_t>(first),
                          values.begin() + static_cast<std::ptrdiff_t>(first + count));
        return out;
    }

    friend bool operator==(const TimeSeries&, const TimeSeries&) = default;
};

/// Outlier scores aligned to the series they were computed from.
struct ScoreSeries {
    TimeAxis axis;
    std::vector<double> scores;

    std::size_t size() const noexcept { return scores.size(); }
    bool empty() const noexcept { return scores.empty(); }

    friend bool operator==(const ScoreSeries&, const ScoreSeries&) = default;
};

enum class Tail { Left, Right };

inline const char* to_string(Tail t) { return t == Tail::Left ? "left" : "right"; }

/// Time quantization used when differencing outlier occurrences.
struct BucketGranularity {
    enum class Kind { Day, MultiHour };

    Kind kind = Kind::Day;
    int hours = 24;

    static constexpr BucketGranularity day() { return {Kind::Day, 24}; }
    static BucketGranularity multi_hour(int h) {
        if (h < 1 || h > 24 || 24 % h != 0)
            throw ConfigError("multi-hour granularity must divide 24, got " + std::to_string(h));
        return {Kind::MultiHour, h};
    }

    constexpr Duration width() const {
        return kind == Kind::Day ? kSecondsPerDay : static_cast<Duration>(hours) * kSecondsPerHour;
    }

    std::string to_string() const {
        return kind == Kind::Day ? std::string("day") : std::to_string(hours) + "h";
    }

    friend constexpr bool operator==(const BucketGranularity&, const BucketGranularity&) = default;
};

/// Index of the UTC-aligned bucket that contains `t`.
constexpr std::int64_t bucket_index(Timestamp t, BucketGranularity g) {
    return floor_div(t, g.width());
}

struct ATHConfig {
    Tail tail = Tail::Right;
    int periodicity_limit = 3;
    double proportion_limit = 0.01;
    BucketGranularity granularity = BucketGranularity::day();

    void validate() const {
        if (periodicity_limit < 1)
            throw ConfigError("periodicity_limit must be >= 1, got " + std::to_string(periodicity_limit));
        if (!(proportion_limit > 0.0 && proportion_limit < 0.5))
            throw ConfigError("proportion_limit must lie in (0, 0.5), got " + std::to_string(proportion_limit));
        if (granularity.kind == BucketGranularity::Kind::MultiHour) {
            const int h = granularity.hours;
            if (h < 1 || h > 24 || 24 % h != 0)
                throw ConfigError("multi-hour granularity must divide 24, got " + std::to_string(h));
        }
    }

    friend bool operator==(const ATHConfig&, const ATHConfig&) = default;
};

/// -1 left-tail anomaly, 0 normal, +1 right-tail anomaly.
enum class AnomalyLabel : std::int8_t { Left = -1, Normal = 0, Right = 1 };

constexpr int code(AnomalyLabel l) { return static_cast<int>(l); }

inline AnomalyLabel label_from_code(long long c) {
    switch (c) {
        case -1: return AnomalyLabel::Left;
        case 0: return AnomalyLabel::Normal;
        case 1: return AnomalyLabel::Right;
        default: throw DataError("unknown label " + std::to_string(c));
    }
}

using Labels = std::vector<AnomalyLabel>;

/// Checks the series invariants and builds a TimeSeries.
inline TimeSeries validate_series(Timestamp start, Duration interval, std::vector<double> values) {
    if (values.empty())
        throw SeriesError(SeriesError::Kind::Empty, 0, "series is empty");
    if (interval <= 0)
        throw SeriesError(SeriesError::Kind::NonPositiveInterval, 0,
                          "interval must be positive, got " + std::to_string(interval));
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]))
            throw SeriesError(SeriesError::Kind::NonFinite, i,
                              "non-finite value at index " + std::to_string(i));
    }
    return TimeSeries{{start, interval}, std::move(values)};
}

}  // namespace ath
