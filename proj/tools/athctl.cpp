// athctl: command-line front end for the adaptive thresholding engine.
//
//   athctl detect    --input kpi.csv [--config cfg] [--output verdicts.csv] [--emit-verdicts]
//   athctl evaluate  --input a.csv,b.csv [--config cfg]... --report dir
//   athctl generate  --family seasonal --seed 42 --out kpi.csv
//   athctl bench-perf --n 100000,1000000 --repeat 3
//
// Exit codes: 0 success, 1 configuration error, 2 data error.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ath/ath.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitData = 2;

struct DetectArgs {
    std::string input;
    std::string config;
    std::string output;
    bool emit = false;
    ath::CsvOptions csv;
};

struct EvaluateArgs {
    std::vector<std::string> inputs;
    std::vector<std::string> configs;
    std::string report;
    bool verdicts = false;
    bool any_anomaly = false;
    ath::CsvOptions csv;
};

struct GenerateArgs {
    std::string family = "seasonal";
    std::uint64_t seed = 0;
    std::string out;
    double rate = 0.003;
    double magnitude = 8.0;
    std::string tails = "both";
    std::int64_t span_days = 89;
    std::int64_t interval = 900;
    double quantum = 1.0;
    std::optional<double> level;
    std::optional<double> amplitude;
    std::optional<double> noise;
    bool epoch = false;
};

struct BenchArgs {
    std::vector<std::size_t> sizes{100000, 1000000};
    int repeat = 3;
    std::uint64_t seed = 7;
};

void add_column_options(CLI::App* app, ath::CsvOptions& csv) {
    app->add_option("--timestamp-column", csv.timestamp_column, "timestamp column name")->capture_default_str();
    app->add_option("--value-column", csv.value_column, "value column name")->capture_default_str();
    app->add_option("--label-column", csv.label_column, "label column name")->capture_default_str();
}

ath::PipelineConfig config_or_default(const std::string& path) {
    return path.empty() ? ath::PipelineConfig{} : ath::load_config(path);
}

int run_detect(const DetectArgs& a) {
    const ath::PipelineConfig cfg = config_or_default(a.config);
    const ath::LabeledDataset ds = ath::read_csv(a.input, a.csv);
    const auto warm = static_cast<std::size_t>(cfg.forecaster_window / ds.series.axis.interval);
    if (ds.series.size() <= warm)
        throw ath::DataError("input shorter than the forecaster window (" + std::to_string(warm) + " points)");

    auto state = ath::warm_up(ds.series.slice(0, warm), cfg, ds.kpi_id);
    std::vector<ath::PointVerdict> verdicts;
    std::size_t anomalies = 0, drift = 0;
    for (std::size_t i = warm; i < ds.series.size(); ++i) {
        verdicts.push_back(state.step(ds.series.timestamp_of(i), ds.series.values[i]));
        const auto& v = verdicts.back();
        anomalies += v.label != ath::AnomalyLabel::Normal;
        drift += v.drift_event.has_value();
        if (a.emit && (v.label != ath::AnomalyLabel::Normal || v.drift_event)) {
            std::cout << ath::format_iso8601(v.timestamp) << " label=" << ath::code(v.label)
                      << " score=" << ath::format_double(v.score);
            if (v.drift_event) std::cout << " drift=" << ath::to_string(v.drift_event->kind);
            std::cout << '\n';
        }
    }
    if (!a.output.empty()) {
        std::ofstream out(a.output, std::ios::binary);
        if (!out) throw ath::DataError("cannot write '" + a.output + "'");
        ath::write_verdicts_csv(out, verdicts);
    }
    std::cerr << ds.kpi_id << ": " << verdicts.size() << " points streamed, " << anomalies << " anomalies, " << drift
              << " drift events\n";
    return 0;
}

int run_evaluate(const EvaluateArgs& a) {
    if (a.inputs.empty()) throw ath::ConfigError("evaluate: no input datasets given");
    std::vector<ath::NamedConfig> configs;
    if (a.configs.empty()) configs.push_back({"default", ath::PipelineConfig{}});
    for (const auto& path : a.configs)
        configs.push_back({std::filesystem::path(path).stem().string(), ath::load_config(path)});

    std::vector<ath::LabeledDataset> datasets;
    for (const auto& path : a.inputs) datasets.push_back(ath::read_csv(path, a.csv));

    ath::BenchmarkOptions opt;
    opt.mode = a.any_anomaly ? ath::MatchMode::AnyAnomaly : ath::MatchMode::SignStrict;
    if (a.verdicts) opt.verdict_dir = std::filesystem::path(a.report) / "verdicts";
    const auto report = ath::benchmark(datasets, configs, opt);
    ath::write_report_files(a.report, report);
    ath::write_report_text(std::cout, report);
    for (const auto& c : report.cells)
        if (!c.score) std::cerr << "NA " << c.dataset << " / " << c.config << ": " << c.error << '\n';
    return 0;
}

int run_generate(const GenerateArgs& a) {
    ath::SyntheticSpec spec;
    if (a.family == "seasonal") spec.family = ath::KpiFamily::Seasonal;
    else if (a.family == "stochastic") spec.family = ath::KpiFamily::Stochastic;
    else throw ath::ConfigError("unknown family '" + a.family + "'");
    if (a.tails == "left") spec.tails = ath::TailSelection::Left;
    else if (a.tails == "right") spec.tails = ath::TailSelection::Right;
    else if (a.tails == "both") spec.tails = ath::TailSelection::Both;
    else throw ath::ConfigError("unknown tails '" + a.tails + "'");
    spec.seed = a.seed;
    spec.anomaly_rate = a.rate;
    spec.anomaly_magnitude = a.magnitude;
    spec.span = a.span_days * ath::kSecondsPerDay;
    spec.interval = a.interval;
    spec.quantum = a.quantum;
    spec.level = a.level;
    spec.amplitude = a.amplitude;
    spec.noise = a.noise;
    const auto ds = ath::generate_synthetic(spec);
    ath::write_csv(a.out, ds, a.epoch ? ath::TimestampFormat::Epoch : ath::TimestampFormat::Iso8601);
    return 0;
}

int run_bench(const BenchArgs& a) {
    std::printf("%12s %12s %12s %10s\n", "n", "best_s", "median_s", "ratio");
    double previous = 0.0;
    for (std::size_t n : a.sizes) {
        if (n == 0) throw ath::ConfigError("bench-perf: sizes must be positive");
        ath::detail::SplitRng rng(a.seed + n);
        ath::ScoreSeries s{{ath::kDefaultSyntheticStart, 900}, std::vector<double>(n)};
        for (auto& x : s.scores) x = rng.normal();
        std::vector<double> times;
        for (int r = 0; r < std::max(1, a.repeat); ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto d = ath::apply_ath(s, ath::ATHConfig{});
            const auto t1 = std::chrono::steady_clock::now();
            if (d.outlier_count > n) return kExitData;
            times.push_back(std::chrono::duration<double>(t1 - t0).count());
        }
        std::sort(times.begin(), times.end());
        const double best = times.front();
        const double median = times[times.size() / 2];
        if (previous > 0.0)
            std::printf("%12zu %12.4f %12.4f %10.2f\n", n, best, median, median / previous);
        else
            std::printf("%12zu %12.4f %12.4f %10s\n", n, best, median, "-");
        previous = median;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive thresholding for KPI anomaly detection"};
    app.require_subcommand(1);

    DetectArgs det;
    auto* detect = app.add_subcommand("detect", "warm up on the leading forecaster window and stream the rest");
    detect->add_option("--input", det.input, "input CSV (timestamp,value[,label])")->required();
    detect->add_option("--config", det.config, "key = value pipeline config");
    detect->add_option("--output", det.output, "per-point verdict CSV");
    detect->add_flag("--emit-verdicts", det.emit, "print anomalies and drift events to stdout");
    add_column_options(detect, det.csv);

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "benchmark configs over labelled datasets");
    evaluate->add_option("--input", ev.inputs, "labelled CSV files")->delimiter(',');
    evaluate->add_option("--config", ev.configs, "config file(s); one grid column each");
    evaluate->add_option("--report", ev.report, "report directory")->required();
    evaluate->add_flag("--verdicts", ev.verdicts, "also dump per-point verdicts");
    evaluate->add_flag("--any-anomaly", ev.any_anomaly, "ignore the tail sign when matching");
    add_column_options(evaluate, ev.csv);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "write a synthetic labelled KPI");
    generate->add_option("--family", gen.family, "seasonal | stochastic");
    generate->add_option("--seed", gen.seed);
    generate->add_option("--out", gen.out, "output CSV")->required();
    generate->add_option("--rate", gen.rate, "anomaly rate");
    generate->add_option("--magnitude", gen.magnitude, "anomaly size in clean IQRs");
    generate->add_option("--tails", gen.tails, "left | right | both");
    generate->add_option("--span-days", gen.span_days);
    generate->add_option("--interval", gen.interval, "seconds");
    generate->add_option("--quantum", gen.quantum, "value rounding step, 0 for continuous");
    generate->add_option("--level", gen.level);
    generate->add_option("--amplitude", gen.amplitude);
    generate->add_option("--noise", gen.noise);
    generate->add_flag("--epoch", gen.epoch, "write epoch-second timestamps");

    BenchArgs bench;
    auto* bench_perf = app.add_subcommand("bench-perf", "time threshold selection on synthetic score windows");
    bench_perf->add_option("--n", bench.sizes, "window sizes")->delimiter(',');
    bench_perf->add_option("--repeat", bench.repeat);
    bench_perf->add_option("--seed", bench.seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (*detect) return run_detect(det);
        if (*evaluate) return run_evaluate(ev);
        if (*generate) return run_generate(gen);
        if (*bench_perf) return run_bench(bench);
    } catch (const ath::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    }
    return 0;
}
