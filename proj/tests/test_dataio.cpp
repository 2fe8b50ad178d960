#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ath/dataio.hpp"
#include "ath/stats.hpp"

using namespace ath;

namespace {

LabeledDataset parse(const std::string& text, CsvOptions opt = {}) {
    std::istringstream in(text);
    return read_csv(in, opt);
}

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const DataError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Iso8601, RoundTrip) {
    EXPECT_EQ(parse_iso8601("2023-02-01T00:00:00Z"), 1675209600);
    EXPECT_EQ(format_iso8601(1675209600), "2023-02-01T00:00:00Z");
    EXPECT_EQ(format_iso8601(0), "1970-01-01T00:00:00Z");
    EXPECT_EQ(format_iso8601(-1), "1969-12-31T23:59:59Z");
    for (Timestamp t = -100000000; t < 2000000000; t += 12345679) EXPECT_EQ(parse_iso8601(format_iso8601(t)), t);
    EXPECT_THROW(parse_iso8601("2023-02-30T00:00:00Z"), DataError);
    EXPECT_THROW(parse_iso8601("2023-02-01 00:00:00"), DataError);
    EXPECT_THROW(parse_iso8601("2023-02-01T24:00:00Z"), DataError);
}

TEST(ReadCsv, WellFormed) {
    const auto ds = parse(
        "timestamp,value,label\n"
        "2023-02-01T00:00:00Z,1.5,0\n"
        "2023-02-01T00:15:00Z,2,1\n"
        "2023-02-01T00:30:00Z,-3,-1\n");
    EXPECT_EQ(ds.series.size(), 3u);
    EXPECT_EQ(ds.series.axis.start, 1675209600);
    EXPECT_EQ(ds.series.axis.interval, 900);
    EXPECT_EQ(ds.series.values, (std::vector<double>{1.5, 2, -3}));
    EXPECT_EQ(ds.labels, (Labels{AnomalyLabel::Normal, AnomalyLabel::Right, AnomalyLabel::Left}));
}

TEST(ReadCsv, EpochAndNoLabels) {
    const auto ds = parse("timestamp,value\n0,1\n900,2\r\n1800,3\n");
    EXPECT_EQ(ds.series.size(), 3u);
    EXPECT_EQ(ds.labels, Labels(3, AnomalyLabel::Normal));
}

TEST(ReadCsv, RemappedColumns) {
    CsvOptions opt;
    opt.timestamp_column = "time";
    opt.value_column = "users";
    opt.kpi_id = "cell-7";
    const auto ds = parse("users,time\n4,0\n5,900\n", opt);
    EXPECT_EQ(ds.series.values, (std::vector<double>{4, 5}));
    EXPECT_EQ(ds.kpi_id, "cell-7");
}

TEST(ReadCsv, Errors) {
    EXPECT_NE(error_of("timestamp,value,label\n0,1,0\n900,2,2\n").find("unknown label"), std::string::npos);
    EXPECT_NE(error_of("timestamp,value,label\n0,1,0\n900,2,2\n").find("line 3"), std::string::npos);

    const auto gap = error_of(
        "timestamp,value\n2023-02-01T00:00:00Z,1\n2023-02-01T00:15:00Z,1\n2023-02-01T00:45:00Z,1\n");
    EXPECT_NE(gap.find("cadence gap: 1 missing point(s) between 2023-02-01T00:15:00Z and 2023-02-01T00:45:00Z"),
              std::string::npos)
        << gap;

    EXPECT_NE(error_of("timestamp,value\n0,1\n900,1\n1000,1\n").find("irregular cadence"), std::string::npos);
    EXPECT_NE(error_of("timestamp,value\n0,abc\n").find("line 2: malformed value"), std::string::npos);
    EXPECT_NE(error_of("timestamp,value,label\n0,1\n").find("malformed row"), std::string::npos);
    EXPECT_NE(error_of("time,value\n0,1\n").find("header"), std::string::npos);
    EXPECT_NE(error_of("").find("header required"), std::string::npos);
    EXPECT_NE(error_of("timestamp,value\n").find("no data rows"), std::string::npos);
    EXPECT_NE(error_of("timestamp,value\n900,1\n0,1\n").find("strictly increasing"), std::string::npos);
    EXPECT_NE(error_of("timestamp,value\n0,nan\n").find("non-finite"), std::string::npos);
}

TEST(ReadCsv, DeclaredInterval) {
    CsvOptions opt;
    opt.interval = 300;
    std::istringstream in("timestamp,value\n0,1\n900,1\n");
    EXPECT_THROW(read_csv(in, opt), DataError);
}

TEST(ReadCsv, MissingFile) {
    EXPECT_THROW(read_csv(std::string("/nonexistent/kpi.csv")), DataError);
}

TEST(WriteCsv, RoundTripIsExact) {
    SyntheticSpec spec;
    spec.seed = 77;
    spec.quantum = 0.0;
    const auto ds = generate_synthetic(spec);
    for (auto fmt : {TimestampFormat::Iso8601, TimestampFormat::Epoch}) {
        std::stringstream buf;
        write_csv(buf, ds, fmt);
        const auto back = read_csv(buf);
        EXPECT_EQ(back.series, ds.series);
        EXPECT_EQ(back.labels, ds.labels);
        EXPECT_EQ(back.splits, ds.splits);
    }
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(WriteCsv, FileRoundTripUsesStem) {
    const auto dir = std::filesystem::temp_directory_path() / "ath_dataio_test";
    std::filesystem::create_directories(dir);
    SyntheticSpec spec;
    spec.seed = 3;
    const auto ds = generate_synthetic(spec);
    const auto path = (dir / "kpi-3.csv").string();
    write_csv(path, ds);
    const auto back = read_csv(path);
    EXPECT_EQ(back.kpi_id, "kpi-3");
    EXPECT_EQ(back.series, ds.series);
    std::filesystem::remove_all(dir);
}

TEST(Splits, StandardMonths) {
    SyntheticSpec spec;
    const auto ds = generate_synthetic(spec);
    EXPECT_EQ(ds.series.size(), 89u * 96u);
    EXPECT_EQ(ds.splits.train.begin, spec.start);
    EXPECT_EQ(ds.splits.train.end - ds.splits.train.begin, 28 * kSecondsPerDay);
    EXPECT_EQ(ds.splits.val.end - ds.splits.val.begin, 31 * kSecondsPerDay);
    EXPECT_EQ(ds.splits.test.end - ds.splits.test.begin, 30 * kSecondsPerDay);
    EXPECT_EQ(ds.splits.val.begin, ds.splits.train.end);
    EXPECT_EQ(ds.splits.test.begin, ds.splits.val.end);
    const auto [a, b] = ds.index_range(ds.splits.test);
    EXPECT_EQ(b - a, 30u * 96u);
    EXPECT_EQ(b, ds.series.size());
}

TEST(Generator, Deterministic) {
    for (auto fam : {KpiFamily::Seasonal, KpiFamily::Stochastic}) {
        SyntheticSpec spec;
        spec.family = fam;
        spec.seed = 42;
        const auto a = generate_synthetic(spec);
        const auto b = generate_synthetic(spec);
        EXPECT_EQ(a.series, b.series);
        EXPECT_EQ(a.labels, b.labels);
        spec.seed = 43;
        EXPECT_NE(generate_synthetic(spec).series, a.series);
    }
}

TEST(Generator, ZeroRateHasNoLabels) {
    SyntheticSpec spec;
    spec.anomaly_rate = 0.0;
    const auto ds = generate_synthetic(spec);
    EXPECT_EQ(ds.labels, Labels(ds.series.size(), AnomalyLabel::Normal));
}

TEST(Generator, InjectedAnomaliesAreSeparatedAndAperiodic) {
    for (auto fam : {KpiFamily::Seasonal, KpiFamily::Stochastic}) {
        SyntheticSpec spec;
        spec.family = fam;
        spec.seed = 1;
        const auto ds = generate_synthetic(spec);
        const std::size_t n = ds.series.size();
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < n; ++i)
            if (ds.labels[i] != AnomalyLabel::Normal) idx.push_back(i);
        EXPECT_EQ(idx.size(), static_cast<std::size_t>(std::llround(0.003 * static_cast<double>(n))));
        EXPECT_EQ(idx.size(), 26u);
        for (std::size_t k = 1; k < idx.size(); ++k) EXPECT_GT(idx[k], idx[k - 1] + 1);
        EXPECT_TRUE(injected_pattern_aperiodic(idx, ds.series.axis));

        // Regenerate the clean signal (same seed, no anomalies) and check
        // the separation from its bucket medians.
        SyntheticSpec clean_spec = spec;
        clean_spec.anomaly_rate = 0.0;
        const auto clean = generate_synthetic(clean_spec);
        const auto model = fit_seasonal_quartile(clean.series, default_slot_duration(spec.interval));
        std::vector<double> dev(n);
        for (std::size_t i = 0; i < n; ++i)
            dev[i] = clean.series.values[i] - model.forecast(clean.series.timestamp_of(i));
        double clean_iqr = stats::iqr(dev);
        if (!(clean_iqr > 0.0)) clean_iqr = spec.quantum;
        for (std::size_t i : idx) {
            const double dist = ds.series.values[i] - model.forecast(ds.series.timestamp_of(i));
            EXPECT_GE(std::abs(dist), 6.0 * clean_iqr);
            EXPECT_EQ(dist > 0, ds.labels[i] == AnomalyLabel::Right);
            EXPECT_NEAR(std::abs(ds.series.values[i] - clean.series.values[i]), 8.0 * clean_iqr, 1e-9);
        }
    }
}

TEST(Generator, TailSelection) {
    SyntheticSpec spec;
    spec.tails = TailSelection::Left;
    for (auto l : generate_synthetic(spec).labels) EXPECT_NE(l, AnomalyLabel::Right);
    spec.tails = TailSelection::Right;
    for (auto l : generate_synthetic(spec).labels) EXPECT_NE(l, AnomalyLabel::Left);
}

TEST(Generator, SpecValidation) {
    SyntheticSpec spec;
    spec.span = 50 * kSecondsPerDay;
    EXPECT_THROW(generate_synthetic(spec), ConfigError);
    spec = SyntheticSpec{};
    spec.anomaly_magnitude = 3.0;
    EXPECT_THROW(generate_synthetic(spec), ConfigError);
    spec = SyntheticSpec{};
    spec.anomaly_rate = 0.01;
    EXPECT_THROW(generate_synthetic(spec), ConfigError);
}

TEST(Generator, AperiodicityCheck) {
    const TimeAxis daily{kDefaultSyntheticStart, kSecondsPerDay};
    EXPECT_TRUE(injected_pattern_aperiodic(std::vector<std::size_t>{0, 1, 4, 10}, daily));
    EXPECT_FALSE(injected_pattern_aperiodic(std::vector<std::size_t>{0, 1, 2, 3}, daily));
}

TEST(Generator, DefaultSuite) {
    const auto suite = default_synthetic_suite();
    ASSERT_EQ(suite.size(), 10u);
    EXPECT_EQ(suite.front().kpi_id, "KPI-A");
    EXPECT_EQ(suite.back().kpi_id, "KPI-J");
    const auto specs = default_suite_specs();
    for (std::size_t k = 0; k < specs.size(); ++k)
        EXPECT_EQ(specs[k].family, k < 6 ? KpiFamily::Seasonal : KpiFamily::Stochastic);
}
