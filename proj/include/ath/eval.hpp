#pragma once

// Point-wise precision / recall / F1 against ground-truth labels and a
// dataset x configuration benchmark grid.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ath/core.hpp"
#include "ath/dataio.hpp"
#include "ath/pipeline.hpp"

namespace ath {

enum class MatchMode { SignStrict, AnyAnomaly };

/// A sign mismatch (+1 predicted on a -1 truth) is both a false positive and
/// a false negative, so tp + fp + fn + tn = n + sign_mismatch.
struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;
    std::size_t sign_mismatch = 0;

    std::size_t total() const { return tp + fp + fn + tn - sign_mismatch; }
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

inline ConfusionCounts confusion(const Labels& pred, const Labels& truth, MatchMode mode = MatchMode::SignStrict) {
    if (pred.size() != truth.size())
        throw DataError("confusion: length mismatch (" + std::to_string(pred.size()) + " vs " +
                        std::to_string(truth.size()) + ")");
    ConfusionCounts c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred[i] != AnomalyLabel::Normal;
        const bool t = truth[i] != AnomalyLabel::Normal;
        if (p && t) {
            if (mode == MatchMode::AnyAnomaly || pred[i] == truth[i]) {
                ++c.tp;
            } else {
                ++c.fp;
                ++c.fn;
                ++c.sign_mismatch;
            }
        } else if (p) {
            ++c.fp;
        } else if (t) {
            ++c.fn;
        } else {
            ++c.tn;
        }
    }
    return c;
}

/// Counts restricted to one anomaly class (Left or Right).
inline ConfusionCounts class_confusion(const Labels& pred, const Labels& truth, AnomalyLabel cls) {
    if (pred.size() != truth.size()) throw DataError("confusion: length mismatch");
    ConfusionCounts c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred[i] == cls;
        const bool t = truth[i] == cls;
        if (p && t) ++c.tp;
        else if (p) ++c.fp;
        else if (t) ++c.fn;
        else ++c.tn;
    }
    return c;
}

struct F1Score {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool degenerate = false;  // some ratio was 0/0
};

inline F1Score f1(const ConfusionCounts& c) {
    F1Score s;
    const auto ratio = [&](std::size_t num, std::size_t den) {
        if (den == 0) {
            s.degenerate = true;
            return 0.0;
        }
        return static_cast<double>(num) / static_cast<double>(den);
    };
    s.precision = ratio(c.tp, c.tp + c.fp);
    s.recall = ratio(c.tp, c.tp + c.fn);
    if (s.precision + s.recall > 0.0) s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
    else s.degenerate = true;
    return s;
}

struct NamedConfig {
    std::string name;
    PipelineConfig config;
};

struct BenchmarkCell {
    std::string dataset;
    std::string config;
    std::optional<F1Score> score;  // empty: NA
    ConfusionCounts counts;
    std::string error;
    std::size_t drift_events = 0;
};

struct BenchmarkMean {
    std::string config;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t cells = 0;  // non-NA cells averaged
};

struct BenchmarkReport {
    std::vector<std::string> datasets;
    std::vector<std::string> configs;
    std::vector<BenchmarkCell> cells;  // row-major: config, then dataset
    std::vector<BenchmarkMean> means;

    const BenchmarkCell& cell(std::size_t config, std::size_t dataset) const {
        return cells.at(config * datasets.size() + dataset);
    }
};

struct BenchmarkOptions {
    MatchMode mode = MatchMode::SignStrict;
    std::optional<std::filesystem::path> verdict_dir;  // per-point dumps when set
};

inline void write_verdicts_csv(std::ostream& out, const std::vector<PointVerdict>& verdicts,
                               const Labels* truth = nullptr) {
    out << "timestamp,value,residual,score,label,left_thr,right_thr,drift";
    if (truth) out << ",truth";
    out << '\n';
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        const auto& v = verdicts[i];
        out << format_iso8601(v.timestamp) << ',' << format_double(v.value) << ',' << format_double(v.residual)
            << ',' << format_double(v.score) << ',' << code(v.label) << ',' << format_double(v.left_threshold)
            << ',' << format_double(v.right_threshold) << ','
            << (v.drift_event ? to_string(v.drift_event->kind) : "");
        if (truth) out << ',' << code((*truth)[i]);
        out << '\n';
    }
}

/// Warm up on the train split, stream validation and test, score the test
/// verdicts.
inline BenchmarkCell evaluate_cell(const LabeledDataset& ds, const NamedConfig& nc,
                                   const BenchmarkOptions& opt = {}) {
    BenchmarkCell cell{ds.kpi_id, nc.name, std::nullopt, {}, {}, 0};
    try {
        if (ds.splits.test.empty()) throw DataError("dataset has no test split");
        auto state = warm_up(ds.series_in(ds.splits.train), nc.config, ds.kpi_id);
        const auto [v0, v1] = ds.index_range(ds.splits.val);
        const auto [t0, t1] = ds.index_range(ds.splits.test);
        for (std::size_t i = v0; i < v1; ++i) {
            if (state.step(ds.series.timestamp_of(i), ds.series.values[i]).drift_event) ++cell.drift_events;
        }
        std::vector<PointVerdict> verdicts;
        verdicts.reserve(t1 - t0);
        Labels pred;
        for (std::size_t i = t0; i < t1; ++i) {
            verdicts.push_back(state.step(ds.series.timestamp_of(i), ds.series.values[i]));
            if (verdicts.back().drift_event) ++cell.drift_events;
            pred.push_back(verdicts.back().label);
        }
        const Labels truth = ds.labels_in(ds.splits.test);
        cell.counts = confusion(pred, truth, opt.mode);
        cell.score = f1(cell.counts);
        if (opt.verdict_dir) {
            std::filesystem::create_directories(*opt.verdict_dir);
            std::ofstream out(*opt.verdict_dir / (ds.kpi_id + "__" + nc.name + ".verdicts.csv"));
            write_verdicts_csv(out, verdicts, &truth);
        }
    } catch (const std::exception& e) {
        cell.score.reset();
        cell.error = e.what();
    }
    return cell;
}

inline BenchmarkReport benchmark(const std::vector<LabeledDataset>& datasets, const std::vector<NamedConfig>& configs,
                                 const BenchmarkOptions& opt = {}) {
    BenchmarkReport r;
    for (const auto& d : datasets) r.datasets.push_back(d.kpi_id);
    for (const auto& c : configs) r.configs.push_back(c.name);
    for (const auto& c : configs) {
        BenchmarkMean m{c.name};
        for (const auto& d : datasets) {
            r.cells.push_back(evaluate_cell(d, c, opt));
            const auto& cell = r.cells.back();
            if (cell.score) {
                m.precision += cell.score->precision;
                m.recall += cell.score->recall;
                m.f1 += cell.score->f1;
                ++m.cells;
            }
        }
        if (m.cells > 0) {
            m.precision /= static_cast<double>(m.cells);
            m.recall /= static_cast<double>(m.cells);
            m.f1 /= static_cast<double>(m.cells);
        }
        r.means.push_back(m);
    }
    return r;
}

namespace detail {
inline std::string fixed3(double x) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << x;
    return os.str();
}
}  // namespace detail

/// dataset,config,precision,recall,f1 with NA for failed cells and one
/// "mean" row per config.
inline void write_report_csv(std::ostream& out, const BenchmarkReport& r) {
    out << "dataset,config,precision,recall,f1\n";
    for (const auto& c : r.cells) {
        out << c.dataset << ',' << c.config << ',';
        if (c.score)
            out << format_double(c.score->precision) << ',' << format_double(c.score->recall) << ','
                << format_double(c.score->f1) << '\n';
        else
            out << "NA,NA,NA\n";
    }
    for (const auto& m : r.means) {
        out << "mean," << m.config << ',';
        if (m.cells)
            out << format_double(m.precision) << ',' << format_double(m.recall) << ',' << format_double(m.f1) << '\n';
        else
            out << "NA,NA,NA\n";
    }
}

inline nlohmann::json report_json(const BenchmarkReport& r) {
    nlohmann::json j;
    j["datasets"] = r.datasets;
    j["configs"] = r.configs;
    j["cells"] = nlohmann::json::array();
    for (const auto& c : r.cells) {
        nlohmann::json jc{{"dataset", c.dataset}, {"config", c.config}};
        if (c.score) {
            jc["precision"] = c.score->precision;
            jc["recall"] = c.score->recall;
            jc["f1"] = c.score->f1;
            jc["tp"] = c.counts.tp;
            jc["fp"] = c.counts.fp;
            jc["fn"] = c.counts.fn;
            jc["tn"] = c.counts.tn;
            jc["drift_events"] = c.drift_events;
        } else {
            jc["precision"] = nullptr;
            jc["recall"] = nullptr;
            jc["f1"] = nullptr;
            jc["error"] = c.error;
        }
        j["cells"].push_back(jc);
    }
    j["means"] = nlohmann::json::array();
    for (const auto& m : r.means) {
        nlohmann::json jm{{"config", m.config}, {"cells", m.cells}};
        if (m.cells) {
            jm["precision"] = m.precision;
            jm["recall"] = m.recall;
            jm["f1"] = m.f1;
        } else {
            jm["f1"] = nullptr;
        }
        j["means"].push_back(jm);
    }
    return j;
}

/// Aligned grid: one row per config, one column per dataset plus Mean.
inline void write_report_text(std::ostream& out, const BenchmarkReport& r) {
    std::size_t w0 = 6;
    for (const auto& c : r.configs) w0 = std::max(w0, c.size());
    std::size_t wc = 6;
    for (const auto& d : r.datasets) wc = std::max(wc, d.size());
    out << std::left << std::setw(static_cast<int>(w0)) << "config";
    for (const auto& d : r.datasets) out << "  " << std::right << std::setw(static_cast<int>(wc)) << d;
    out << "  " << std::setw(static_cast<int>(wc)) << "Mean" << '\n';
    for (std::size_t ci = 0; ci < r.configs.size(); ++ci) {
        out << std::left << std::setw(static_cast<int>(w0)) << r.configs[ci];
        for (std::size_t di = 0; di < r.datasets.size(); ++di) {
            const auto& c = r.cell(ci, di);
            out << "  " << std::right << std::setw(static_cast<int>(wc)) << (c.score ? detail::fixed3(c.score->f1) : "NA");
        }
        const auto& m = r.means[ci];
        out << "  " << std::right << std::setw(static_cast<int>(wc)) << (m.cells ? detail::fixed3(m.f1) : "NA") << '\n';
    }
}

inline void write_report_files(const std::filesystem::path& dir, const BenchmarkReport& r) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "report.csv");
        write_report_csv(out, r);
    }
    {
        std::ofstream out(dir / "report.json");
        out << report_json(r).dump(2) << '\n';
    }
    {
        std::ofstream out(dir / "report.txt");
        write_report_text(out, r);
    }
}

}  // namespace ath
