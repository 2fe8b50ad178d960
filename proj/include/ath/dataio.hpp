#pragma once

// CSV ingestion/emission for labelled KPI series and a deterministic
// synthetic generator for seasonal and stochastic KPIs with injected,
// deliberately aperiodic anomalies.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ath/core.hpp"
#include "ath/forecast.hpp"
#include "ath/stats.hpp"
#include "ath/thresholding.hpp"

namespace ath {

struct TimeRange {
    Timestamp begin = 0;
    Timestamp end = 0;  // exclusive

    Duration length() const { return end - begin; }
    bool empty() const { return end <= begin; }
    friend bool operator==(const TimeRange&, const TimeRange&) = default;
};

struct Splits {
    TimeRange train;
    TimeRange val;
    TimeRange test;

    friend bool operator==(const Splits&, const Splits&) = default;
};

inline constexpr Duration kTrainSpan = 28 * kSecondsPerDay;
inline constexpr Duration kValSpan = 31 * kSecondsPerDay;
inline constexpr Duration kTestSpan = 30 * kSecondsPerDay;

/// Train = first 28 days, validation = next 31 days, test = the rest,
/// clamped to the series end.
inline Splits standard_splits(const TimeSeries& s) {
    const Timestamp b = s.axis.start;
    const Timestamp e = s.end();
    Splits sp;
    sp.train = {b, std::min(e, b + kTrainSpan)};
    sp.val = {sp.train.end, std::min(e, sp.train.end + kValSpan)};
    sp.test = {sp.val.end, e};
    return sp;
}

struct LabeledDataset {
    std::string kpi_id;
    TimeSeries series;
    Labels labels;
    Splits splits;

    /// Index range [first, last) of the points falling in `r`.
    std::pair<std::size_t, std::size_t> index_range(const TimeRange& r) const {
        const auto idx = [&](Timestamp t) {
            const Timestamp rel = std::clamp<Timestamp>(t - series.axis.start, 0, series.span());
            return static_cast<std::size_t>((rel + series.axis.interval - 1) / series.axis.interval);
        };
        return {idx(r.begin), idx(r.end)};
    }

    TimeSeries series_in(const TimeRange& r) const {
        const auto [a, b] = index_range(r);
        return series.slice(a, b - a);
    }

    Labels labels_in(const TimeRange& r) const {
        const auto [a, b] = index_range(r);
        return Labels(labels.begin() + static_cast<std::ptrdiff_t>(a), labels.begin() + static_cast<std::ptrdiff_t>(b));
    }
};

// ---------------------------------------------------------------------------
// Timestamps

inline Timestamp parse_iso8601(std::string_view s) {
    // YYYY-MM-DDTHH:MM:SSZ
    if (s.size() != 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' || s[16] != ':' ||
        s[19] != 'Z')
        throw DataError("bad ISO-8601 timestamp '" + std::string(s) + "'");
    const auto num = [&](std::size_t pos, std::size_t len) {
        int v = 0;
        const auto r = std::from_chars(s.data() + pos, s.data() + pos + len, v);
        if (r.ec != std::errc() || r.ptr != s.data() + pos + len)
            throw DataError("bad ISO-8601 timestamp '" + std::string(s) + "'");
        return v;
    };
    using namespace std::chrono;
    const year_month_day ymd{year{num(0, 4)}, month{static_cast<unsigned>(num(5, 2))},
                             day{static_cast<unsigned>(num(8, 2))}};
    const int hh = num(11, 2), mm = num(14, 2), ss = num(17, 2);
    if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59)
        throw DataError("bad ISO-8601 timestamp '" + std::string(s) + "'");
    return static_cast<Timestamp>(sys_days{ymd}.time_since_epoch().count()) * kSecondsPerDay + hh * 3600 +
           mm * 60 + ss;
}

inline std::string format_iso8601(Timestamp t) {
    using namespace std::chrono;
    const std::int64_t days = floor_div(t, kSecondsPerDay);
    const std::int64_t sec = t - days * kSecondsPerDay;
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long long>(sec / 3600), static_cast<long long>(sec % 3600 / 60),
                  static_cast<long long>(sec % 60));
    return buf;
}

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

// ---------------------------------------------------------------------------
// CSV

enum class TimestampFormat { Iso8601, Epoch };

struct CsvOptions {
    std::string timestamp_column = "timestamp";
    std::string value_column = "value";
    std::string label_column = "label";
    std::optional<Duration> interval;  // inferred from the first two rows if unset
    std::string kpi_id;                // defaults to the file stem
};

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = line.find(',', pos);
        std::string_view f = line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
        while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
        out.push_back(f);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

inline bool looks_like_epoch(std::string_view s) {
    if (s.empty()) return false;
    std::size_t i = s[0] == '-' ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (s[i] < '0' || s[i] > '9') return false;
    return true;
}

inline std::string stem_of(const std::string& path) {
    const auto slash = path.find_last_of("/\\");
    std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
    const auto dot = name.find_last_of('.');
    return dot == std::string::npos ? name : name.substr(0, dot);
}

}  // namespace detail

inline LabeledDataset read_csv(std::istream& in, const CsvOptions& opt = {}) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw DataError("empty CSV: header required");
    ++line_no;
    const auto header = detail::split_csv_line(line);
    std::optional<std::size_t> ts_col, val_col, lab_col;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == opt.timestamp_column) ts_col = c;
        else if (header[c] == opt.value_column) val_col = c;
        else if (header[c] == opt.label_column) lab_col = c;
    }
    if (!ts_col || !val_col)
        throw DataError("CSV header must contain '" + opt.timestamp_column + "' and '" + opt.value_column + "'");

    std::vector<Timestamp> times;
    std::vector<double> values;
    Labels labels;
    std::optional<TimestampFormat> fmt;
    const auto fail = [&](const std::string& msg) -> DataError {
        return DataError("line " + std::to_string(line_no) + ": " + msg);
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = detail::split_csv_line(line);
        const std::size_t need = std::max({*ts_col, *val_col, lab_col.value_or(0)}) + 1;
        if (fields.size() < need) throw fail("malformed row, expected " + std::to_string(need) + " fields");

        const std::string_view ts = fields[*ts_col];
        if (!fmt) fmt = detail::looks_like_epoch(ts) ? TimestampFormat::Epoch : TimestampFormat::Iso8601;
        Timestamp t = 0;
        if (*fmt == TimestampFormat::Epoch) {
            const auto r = std::from_chars(ts.data(), ts.data() + ts.size(), t);
            if (r.ec != std::errc() || r.ptr != ts.data() + ts.size())
                throw fail("malformed epoch timestamp '" + std::string(ts) + "'");
        } else {
            try {
                t = parse_iso8601(ts);
            } catch (const DataError& e) {
                throw fail(e.what());
            }
        }

        const std::string_view vs = fields[*val_col];
        double v = 0.0;
        const auto r = std::from_chars(vs.data(), vs.data() + vs.size(), v);
        if (vs.empty() || r.ec != std::errc() || r.ptr != vs.data() + vs.size())
            throw fail("malformed value '" + std::string(vs) + "'");
        if (!std::isfinite(v)) throw fail("non-finite value");

        AnomalyLabel lab = AnomalyLabel::Normal;
        if (lab_col) {
            const std::string_view ls = fields[*lab_col];
            long long c = 0;
            const auto lr = std::from_chars(ls.data(), ls.data() + ls.size(), c);
            if (ls.empty() || lr.ec != std::errc() || lr.ptr != ls.data() + ls.size())
                throw fail("malformed label '" + std::string(ls) + "'");
            if (c < -1 || c > 1) throw fail("unknown label " + std::string(ls));
            lab = label_from_code(c);
        }

        if (!times.empty()) {
            const Duration expected = opt.interval.value_or(times.size() == 1 ? t - times[0] : times[1] - times[0]);
            if (expected <= 0) throw fail("timestamps must be strictly increasing");
            const Duration gap = t - times.back();
            if (gap != expected) {
                if (gap > expected && gap % expected == 0)
                    throw fail("cadence gap: " + std::to_string(gap / expected - 1) + " missing point(s) between " +
                               format_iso8601(times.back()) + " and " + format_iso8601(t));
                throw fail("irregular cadence: step of " + std::to_string(gap) + " s, expected " +
                           std::to_string(expected) + " s");
            }
        }
        times.push_back(t);
        values.push_back(v);
        labels.push_back(lab);
    }
    if (times.empty()) throw DataError("CSV has no data rows");

    const Duration interval = opt.interval.value_or(times.size() > 1 ? times[1] - times[0] : Duration{900});
    LabeledDataset ds;
    ds.kpi_id = opt.kpi_id;
    ds.series = validate_series(times.front(), interval, std::move(values));
    ds.labels = std::move(labels);
    ds.splits = standard_splits(ds.series);
    return ds;
}

inline LabeledDataset read_csv(const std::string& path, CsvOptions opt = {}) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    if (opt.kpi_id.empty()) opt.kpi_id = detail::stem_of(path);
    try {
        return read_csv(in, opt);
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

inline void write_csv(std::ostream& out, const LabeledDataset& ds, TimestampFormat fmt = TimestampFormat::Iso8601) {
    out << "timestamp,value,label\n";
    for (std::size_t i = 0; i < ds.series.size(); ++i) {
        const Timestamp t = ds.series.timestamp_of(i);
        out << (fmt == TimestampFormat::Iso8601 ? format_iso8601(t) : std::to_string(t)) << ','
            << format_double(ds.series.values[i]) << ',' << code(ds.labels[i]) << '\n';
    }
}

inline void write_csv(const std::string& path, const LabeledDataset& ds,
                      TimestampFormat fmt = TimestampFormat::Iso8601) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    write_csv(out, ds, fmt);
}

// ---------------------------------------------------------------------------
// Synthetic KPIs

enum class KpiFamily { Seasonal, Stochastic };
enum class TailSelection { Left, Right, Both };

inline constexpr Timestamp kDefaultSyntheticStart = 1675209600;  // 2023-02-01T00:00:00Z

struct SyntheticSpec {
    KpiFamily family = KpiFamily::Seasonal;
    std::uint64_t seed = 0;
    Timestamp start = kDefaultSyntheticStart;
    Duration interval = 900;
    Duration span = kTrainSpan + kValSpan + kTestSpan;
    double anomaly_rate = 0.003;
    double anomaly_magnitude = 8.0;  // multiples of the clean IQR
    TailSelection tails = TailSelection::Both;

    // Signal shape. Seasonal: level + amplitude * daily profile, scaled down
    // on weekends, plus Gaussian noise of sd `noise`. Stochastic: level times
    // lognormal noise with log-sd `noise`.
    std::optional<double> level;
    std::optional<double> amplitude;
    std::optional<double> noise;
    double weekend_factor = 0.6;
    // Observations are rounded to multiples of `quantum` (counters); 0 keeps
    // them continuous.
    double quantum = 1.0;

    void validate() const {
        if (interval <= 0) throw ConfigError("interval must be positive");
        if (!(anomaly_rate >= 0.0 && anomaly_rate < 0.005))
            throw ConfigError("anomaly_rate must lie in [0, 0.005)");
        if (!(anomaly_magnitude > 3.0)) throw ConfigError("anomaly_magnitude must exceed 3");
        if (quantum < 0.0) throw ConfigError("quantum must be >= 0");
        if (noise && !(*noise > 0.0)) throw ConfigError("noise must be positive");
        if (span < kTrainSpan + kValSpan + interval)
            throw ConfigError("span too short for train/validation/test splits: need more than " +
                              std::to_string((kTrainSpan + kValSpan) / kSecondsPerDay) + " days");
    }
};

namespace detail {

// Portable generator: the standard distributions are implementation-defined.
class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed) : eng_(seed) {}

    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

    double normal() {
        if (spare_) {
            const double z = *spare_;
            spare_.reset();
            return z;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        constexpr double kTwoPi = 6.283185307179586;
        spare_ = r * std::sin(kTwoPi * u2);
        return r * std::cos(kTwoPi * u2);
    }

private:
    std::mt19937_64 eng_;
    std::optional<double> spare_;
};

inline double quantize(double x, double q) { return q > 0.0 ? std::round(x / q) * q : x; }

// Daily shape in [0, 1]: low at night, broad daytime plateau with an evening
// peak.
// Hourly traffic level: constant within each clock hour.
inline double daily_profile(Timestamp t) {
    constexpr double kTwoPi = 6.283185307179586;
    const double h = static_cast<double>((t - floor_div(t, kSecondsPerDay) * kSecondsPerDay) / kSecondsPerHour);
    return 0.5 - 0.5 * std::cos(kTwoPi * (h - 3.0) / 24.0);
}

}  // namespace detail

/// Occurrence pattern check used by the generator: within every 7-day window
/// no positive day difference between anomalies repeats more than twice.
inline bool injected_pattern_aperiodic(std::span<const std::size_t> sorted_indices, TimeAxis axis,
                                       int max_repeat = 2) {
    std::vector<std::int64_t> days;
    for (std::size_t i : sorted_indices) days.push_back(bucket_index(axis.timestamp_of(i), BucketGranularity::day()));
    for (std::size_t a = 0; a < days.size(); ++a) {
        std::map<std::int64_t, int> hist;
        for (std::size_t i = a; i < days.size() && days[i] - days[a] < 7; ++i)
            for (std::size_t j = a; j < i; ++j)
                if (days[i] > days[j] && ++hist[days[i] - days[j]] > max_repeat) return false;
    }
    return true;
}

inline LabeledDataset generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    detail::SplitRng rng(spec.seed * 0x9E3779B97F4A7C15ULL + 0x2545F4914F6CDD1DULL);
    const auto n = static_cast<std::size_t>(spec.span / spec.interval);
    const TimeAxis axis{spec.start, spec.interval};
    const bool seasonal = spec.family == KpiFamily::Seasonal;

    const double level = spec.level.value_or(seasonal ? 60.0 : 4.0);
    const double amplitude = spec.amplitude.value_or(seasonal ? 40.0 : 0.0);
    const double noise = spec.noise.value_or(seasonal ? 0.25 : 0.1);

    std::vector<double> clean(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Timestamp t = axis.timestamp_of(i);
        double x = 0.0;
        if (seasonal) {
            const double week = day_of_week(t) >= 5 ? spec.weekend_factor : 1.0;
            x = level + amplitude * week * detail::daily_profile(t) + noise * rng.normal();
        } else {
            x = level * std::exp(noise * rng.normal());
        }
        clean[i] = detail::quantize(x, spec.quantum);
    }

    // Spread of the clean signal around its own weekly (weekday, hour) medians.
    const TimeSeries clean_series{axis, clean};
    const SeasonalQuartileModel clean_model = fit_seasonal_quartile(clean_series, default_slot_duration(spec.interval));
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i) dev[i] = clean[i] - clean_model.forecast(axis.timestamp_of(i));
    double clean_iqr = stats::iqr(dev);
    if (!(clean_iqr > 0.0)) clean_iqr = spec.quantum > 0.0 ? spec.quantum : 1.0;

    LabeledDataset ds;
    ds.kpi_id = std::string(seasonal ? "seasonal" : "stochastic") + "-" + std::to_string(spec.seed);
    ds.labels.assign(n, AnomalyLabel::Normal);
    std::vector<double> values = clean;

    const auto target = static_cast<std::size_t>(std::llround(spec.anomaly_rate * static_cast<double>(n)));
    std::vector<std::size_t> placed;  // kept sorted
    const std::size_t max_attempts = 10000 * (target + 1);
    for (std::size_t attempt = 0; placed.size() < target; ++attempt) {
        if (attempt >= max_attempts) throw DataError("synthetic generator could not place all anomalies");
        const std::size_t i = rng.below(n);
        const double sign = spec.tails == TailSelection::Right  ? 1.0
                            : spec.tails == TailSelection::Left ? -1.0
                            : (rng.uniform() < 0.5 ? -1.0 : 1.0);
        const auto pos = std::lower_bound(placed.begin(), placed.end(), i);
        if (pos != placed.end() && *pos <= i + 1) continue;
        if (pos != placed.begin() && *std::prev(pos) + 1 >= i) continue;

        const double injected = clean[i] + sign * spec.anomaly_magnitude * clean_iqr;
        if (std::abs(injected - clean_model.forecast(axis.timestamp_of(i))) < 6.0 * clean_iqr) continue;

        std::vector<std::size_t> trial = placed;
        trial.insert(trial.begin() + (pos - placed.begin()), i);
        if (!injected_pattern_aperiodic(trial, axis)) continue;

        placed = std::move(trial);
        values[i] = injected;
        ds.labels[i] = sign > 0 ? AnomalyLabel::Right : AnomalyLabel::Left;
    }

    ds.series = validate_series(spec.start, spec.interval, std::move(values));
    ds.splits = standard_splits(ds.series);
    return ds;
}

/// Ten KPIs: six seasonal, four stochastic, parameters derived from `seed`.
inline std::vector<SyntheticSpec> default_suite_specs(std::uint64_t seed = 2023, double magnitude = 8.0) {
    std::vector<SyntheticSpec> specs;
    detail::SplitRng rng(seed);
    for (int k = 0; k < 10; ++k) {
        SyntheticSpec s;
        s.family = k < 6 ? KpiFamily::Seasonal : KpiFamily::Stochastic;
        s.seed = seed * 100 + static_cast<std::uint64_t>(k);
        s.anomaly_magnitude = magnitude;
        if (s.family == KpiFamily::Seasonal) {
            s.level = 30.0 + 60.0 * rng.uniform();
            s.amplitude = 20.0 + 60.0 * rng.uniform();
            s.weekend_factor = 0.4 + 0.4 * rng.uniform();
        } else {
            s.level = 2.0 + 4.0 * rng.uniform();
        }
        specs.push_back(s);
    }
    return specs;
}

inline std::vector<LabeledDataset> default_synthetic_suite(std::uint64_t seed = 2023, double magnitude = 8.0) {
    std::vector<LabeledDataset> out;
    const char* names = "ABCDEFGHIJ";
    int k = 0;
    for (const auto& spec : default_suite_specs(seed, magnitude)) {
        auto ds = generate_synthetic(spec);
        ds.kpi_id = std::string("KPI-") + names[k++];
        out.push_back(std::move(ds));
    }
    return out;
}

}  // namespace ath
