#pragma once

// Flat key = value configuration files mirroring PipelineConfig.
//
//   forecaster_window = 28d
//   detector_window   = 7d
//   drift_check_every = 96
//   forecaster        = seasonal_quartile | naive
//   slot_duration     = 1h
//   scorer            = zscore
//   candidates        = all | pot
//   pot_quantile      = 0.98
//   periodicity_limit = 3           (both tails; left./right. prefixes override)
//   proportion_limit  = 0.01
//   granularity       = day | 6h
//   shrink_factor     = 0.5
//   weekly_refit      = false
//
// Durations accept an s/m/h/d suffix; a bare integer means seconds. Lines
// starting with '#' are comments.

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>

#include "ath/core.hpp"
#include "ath/pipeline.hpp"

namespace ath {

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline Duration parse_duration(std::string_view v, std::string_view key) {
    Duration unit = 1;
    if (!v.empty()) {
        switch (v.back()) {
            case 's': unit = 1; v.remove_suffix(1); break;
            case 'm': unit = 60; v.remove_suffix(1); break;
            case 'h': unit = kSecondsPerHour; v.remove_suffix(1); break;
            case 'd': unit = kSecondsPerDay; v.remove_suffix(1); break;
            default: break;
        }
    }
    Duration x = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size())
        throw ConfigError("bad duration for '" + std::string(key) + "'");
    return x * unit;
}

template <class T>
T parse_number(std::string_view v, std::string_view key) {
    T x{};
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size())
        throw ConfigError("bad number for '" + std::string(key) + "': '" + std::string(v) + "'");
    return x;
}

inline bool parse_bool(std::string_view v, std::string_view key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("bad boolean for '" + std::string(key) + "'");
}

inline BucketGranularity parse_granularity(std::string_view v) {
    if (v == "day") return BucketGranularity::day();
    if (!v.empty() && v.back() == 'h') return BucketGranularity::multi_hour(parse_number<int>(v.substr(0, v.size() - 1), "granularity"));
    throw ConfigError("bad granularity '" + std::string(v) + "' (expected day or <N>h)");
}

inline void apply_ath_key(ATHConfig& c, std::string_view key, std::string_view v) {
    if (key == "periodicity_limit") c.periodicity_limit = parse_number<int>(v, key);
    else if (key == "proportion_limit") c.proportion_limit = parse_number<double>(v, key);
    else if (key == "granularity") c.granularity = parse_granularity(v);
    else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

}  // namespace detail

inline PipelineConfig parse_config(std::istream& in) {
    PipelineConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    // Shared ATH keys apply first so that left./right. keys override them
    // regardless of order.
    std::vector<std::pair<std::string, std::string>> shared, left, right;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = detail::trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key(detail::trim(body.substr(0, eq)));
        const std::string_view v = detail::trim(body.substr(eq + 1));

        if (key == "forecaster_window") cfg.forecaster_window = detail::parse_duration(v, key);
        else if (key == "detector_window") cfg.detector_window = detail::parse_duration(v, key);
        else if (key == "drift_check_every") cfg.drift_check_every = detail::parse_number<std::size_t>(v, key);
        else if (key == "slot_duration") cfg.slot_duration = detail::parse_duration(v, key);
        else if (key == "shrink_factor") cfg.shrink_factor = detail::parse_number<double>(v, key);
        else if (key == "weekly_refit") cfg.weekly_refit = detail::parse_bool(v, key);
        else if (key == "pot_quantile") cfg.candidates.initial_quantile = detail::parse_number<double>(v, key);
        else if (key == "forecaster") {
            if (v == "seasonal_quartile") cfg.forecaster = ForecasterKind::SeasonalQuartile;
            else if (v == "naive") cfg.forecaster = ForecasterKind::Naive;
            else throw ConfigError("unknown forecaster '" + std::string(v) + "'");
        } else if (key == "scorer") {
            if (v != "zscore") throw ConfigError("unknown scorer '" + std::string(v) + "'");
            cfg.scorer = ScorerKind::ZScore;
        } else if (key == "candidates") {
            if (v == "all") cfg.candidates.kind = CandidateSource::Kind::AllScores;
            else if (v == "pot") cfg.candidates.kind = CandidateSource::Kind::PotPeaks;
            else throw ConfigError("unknown candidate source '" + std::string(v) + "'");
        } else if (key.starts_with("left.")) {
            left.emplace_back(key.substr(5), v);
        } else if (key.starts_with("right.")) {
            right.emplace_back(key.substr(6), v);
        } else if (key == "periodicity_limit" || key == "proportion_limit" || key == "granularity") {
            shared.emplace_back(key, v);
        } else {
            throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    for (const auto& [k, v] : shared) {
        detail::apply_ath_key(cfg.ath_left, k, v);
        detail::apply_ath_key(cfg.ath_right, k, v);
    }
    for (const auto& [k, v] : left) detail::apply_ath_key(cfg.ath_left, k, v);
    for (const auto& [k, v] : right) detail::apply_ath_key(cfg.ath_right, k, v);
    cfg.validate();
    return cfg;
}

inline PipelineConfig parse_config_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

inline PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    return parse_config(in);
}

}  // namespace ath
