#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ath/eval.hpp"

using namespace ath;

namespace {

constexpr auto L = AnomalyLabel::Left;
constexpr auto N = AnomalyLabel::Normal;
constexpr auto R = AnomalyLabel::Right;

LabeledDataset small_kpi(std::uint64_t seed) {
    SyntheticSpec spec;
    spec.seed = seed;
    auto ds = generate_synthetic(spec);
    ds.kpi_id = "kpi" + std::to_string(seed);
    return ds;
}

}  // namespace

TEST(Confusion, Identical) {
    const Labels p{N, R, N, L};
    for (auto mode : {MatchMode::SignStrict, MatchMode::AnyAnomaly}) {
        const auto c = confusion(p, p, mode);
        EXPECT_EQ(c, (ConfusionCounts{2, 0, 0, 2, 0}));
        EXPECT_EQ(c.total(), 4u);
    }
}

TEST(Confusion, SignMismatch) {
    const Labels p{R, N, N}, t{L, N, N};
    const auto strict = confusion(p, t, MatchMode::SignStrict);
    EXPECT_EQ(strict.tp, 0u);
    EXPECT_EQ(strict.fp, 1u);
    EXPECT_EQ(strict.fn, 1u);
    EXPECT_EQ(strict.total(), 3u);
    EXPECT_EQ(confusion(p, t, MatchMode::AnyAnomaly).tp, 1u);

    const auto right = class_confusion(p, t, R);
    EXPECT_EQ(right.fp, 1u);
    EXPECT_EQ(right.fn, 0u);
    const auto left = class_confusion(p, t, L);
    EXPECT_EQ(left.fn, 1u);
    EXPECT_EQ(left.fp, 0u);
}

TEST(Confusion, AllNormal) {
    const Labels z(5, N);
    const auto c = confusion(z, z);
    EXPECT_EQ(c.tn, 5u);
    const auto s = f1(c);
    EXPECT_EQ(s.f1, 0.0);
    EXPECT_TRUE(s.degenerate);
    EXPECT_THROW(confusion(z, Labels(4, N)), DataError);
}

TEST(F1, HandValues) {
    const auto s = f1({2, 1, 1, 0, 0});
    EXPECT_DOUBLE_EQ(s.precision, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(s.recall, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(s.f1, 2.0 / 3.0);
    EXPECT_FALSE(s.degenerate);
    EXPECT_EQ(f1({3, 0, 0, 10, 0}).f1, 1.0);
    EXPECT_EQ(f1({0, 2, 3, 10, 0}).f1, 0.0);
}

TEST(Benchmark, SingleCellMeanEqualsCell) {
    const auto r = benchmark({small_kpi(1)}, {{"default", PipelineConfig{}}});
    ASSERT_EQ(r.cells.size(), 1u);
    ASSERT_TRUE(r.cells[0].score);
    EXPECT_EQ(r.means[0].f1, r.cells[0].score->f1);
    EXPECT_EQ(r.means[0].cells, 1u);
    EXPECT_GE(r.cells[0].score->f1, 0.0);
    EXPECT_LE(r.cells[0].score->f1, 1.0);
    EXPECT_EQ(r.cells[0].counts.total(), 30u * 96u);
}

TEST(Benchmark, FailingCellIsNA) {
    auto bad = small_kpi(2);
    bad.series.values.assign(bad.series.size(), 1.0);
    bad.kpi_id = "flat";
    const auto r = benchmark({small_kpi(1), bad}, {{"default", PipelineConfig{}}});
    EXPECT_TRUE(r.cell(0, 0).score);
    EXPECT_FALSE(r.cell(0, 1).score);
    EXPECT_NE(r.cell(0, 1).error.find("degenerate"), std::string::npos);
    EXPECT_EQ(r.means[0].cells, 1u);

    std::ostringstream csv;
    write_report_csv(csv, r);
    EXPECT_NE(csv.str().find("flat,default,NA,NA,NA"), std::string::npos);
    EXPECT_EQ(csv.str().rfind("dataset,config,precision,recall,f1\n", 0), 0u);
    const auto j = report_json(r);
    EXPECT_TRUE(j["cells"][1]["f1"].is_null());
    std::ostringstream txt;
    write_report_text(txt, r);
    EXPECT_NE(txt.str().find("NA"), std::string::npos);
}

TEST(Benchmark, DeterministicAndFilesWritten) {
    const std::vector<LabeledDataset> ds{small_kpi(4), small_kpi(5)};
    PipelineConfig strict;
    strict.ath_right.periodicity_limit = 2;
    const std::vector<NamedConfig> cfgs{{"a", PipelineConfig{}}, {"b", strict}};
    const auto dir = std::filesystem::temp_directory_path() / "ath_eval_test";
    BenchmarkOptions opt;
    opt.verdict_dir = dir / "verdicts";
    const auto r1 = benchmark(ds, cfgs, opt);
    const auto r2 = benchmark(ds, cfgs);
    EXPECT_EQ(report_json(r1), report_json(r2));
    write_report_files(dir, r1);
    for (const char* f : {"report.csv", "report.json", "report.txt"}) EXPECT_TRUE(std::filesystem::exists(dir / f));
    const auto dump = dir / "verdicts" / "kpi4__a.verdicts.csv";
    ASSERT_TRUE(std::filesystem::exists(dump));
    std::ifstream in(dump);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "timestamp,value,residual,score,label,left_thr,right_thr,drift,truth");
    std::filesystem::remove_all(dir);
}
