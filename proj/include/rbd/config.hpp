#pragma once

// Run configuration: a flat key=value text file with section-prefixed keys
// (`filter.emg.notch_hz=50,60`). Unknown keys are errors. Seeds are explicit
// constants; nothing is derived from the wall clock.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rbd/dsp/preprocess.hpp"
#include "rbd/errors.hpp"
#include "rbd/montage.hpp"
#include "rbd/rswa.hpp"
#include "rbd/util/parallel.hpp"
#include "rbd/util/strings.hpp"

namespace rbd {

struct RunConfig {
    // paths
    std::string dataset_manifest;  // subject_id,cohort,edf_path,hypnogram_path
    std::string store_dir;
    std::string out_dir = "out";

    // montage + preprocessing
    MontagePrefs montage;
    dsp::PreprocessSpec filter;
    double target_rate_hz = 200.0;
    double min_recording_s = 300.0;  // shorter inputs are rejected at ingest

    // RSWA metric parameters
    rswa::AssembleParams metrics;

    // staging classifier
    std::size_t staging_n_trees = 500;
    std::uint64_t staging_seed = 101;
    int folds = 10;
    std::uint64_t fold_seed = 303;

    // RBD detector
    std::size_t detect_n_trees = 500;
    std::uint64_t detect_seed = 202;
    std::size_t importance_repetitions = 10;

    // synthetic cohort
    std::size_t synth_n_hc = 20;
    std::size_t synth_n_rbd = 20;
    double synth_hours = 4.0;
    std::uint64_t synth_seed = 20230101;

    unsigned jobs = 0;  // 0 = hardware concurrency

    unsigned effective_jobs() const { return jobs == 0 ? default_jobs() : jobs; }
};

namespace detail {

inline std::vector<double> parse_double_list(const std::string& value, const std::string& key) {
    std::vector<double> out;
    for (const auto& part : split(value, ','))
        if (!trim(part).empty()) out.push_back(parse_double(part, key));
    return out;
}

inline std::vector<std::string> parse_string_list(const std::string& value) {
    std::vector<std::string> out;
    for (const auto& part : split(value, ','))
        if (!trim(part).empty()) out.push_back(trim(part));
    return out;
}

}  // namespace detail

inline void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    using detail::parse_double_list;
    using detail::parse_string_list;
    auto as_double = [&] { return parse_double(value, key); };
    auto as_u64 = [&] { return static_cast<std::uint64_t>(parse_int(value, key)); };
    auto as_size = [&] { return static_cast<std::size_t>(parse_int(value, key)); };

    if (key == "dataset.manifest") cfg.dataset_manifest = value;
    else if (key == "store.dir") cfg.store_dir = value;
    else if (key == "out.dir") cfg.out_dir = value;
    else if (key == "montage.eeg") cfg.montage.eeg = parse_string_list(value);
    else if (key == "montage.eog_right") cfg.montage.eog_right = parse_string_list(value);
    else if (key == "montage.eog_left") cfg.montage.eog_left = parse_string_list(value);
    else if (key == "montage.eog_direct") cfg.montage.eog_direct = parse_string_list(value);
    else if (key == "montage.emg") cfg.montage.emg = parse_string_list(value);
    else if (key == "filter.order") cfg.filter.order = static_cast<int>(parse_int(value, key));
    else if (key == "filter.eeg.band_hz") {
        const auto edges = parse_double_list(value, key);
        if (edges.size() != 2) throw ConfigError("filter.eeg.band_hz needs two edges");
        cfg.filter.eeg_band_lo_hz = edges[0];
        cfg.filter.eeg_band_hi_hz = edges[1];
    } else if (key == "filter.emg.band_hz") {
        const auto edges = parse_double_list(value, key);
        if (edges.size() != 2) throw ConfigError("filter.emg.band_hz needs two edges");
        cfg.filter.emg_band_lo_hz = edges[0];
        cfg.filter.emg_band_hi_hz = edges[1];
    } else if (key == "filter.emg.notch_hz") cfg.filter.emg_notch_hz = parse_double_list(value, key);
    else if (key == "filter.notch_half_width_hz") cfg.filter.notch_half_width_hz = as_double();
    else if (key == "resample.rate_hz") cfg.target_rate_hz = as_double();
    else if (key == "ingest.min_recording_s") cfg.min_recording_s = as_double();
    else if (key == "rswa.atonia.window_s") cfg.metrics.atonia.window_s = as_double();
    else if (key == "rswa.atonia.correction_s") cfg.metrics.atonia.correction_span_s = as_double();
    else if (key == "rswa.atonia.corrected")
        cfg.metrics.atonia.corrected = parse_int(value, key) != 0;
    else if (key == "rswa.stream.percentile") cfg.metrics.stream.nrem_percentile = as_double();
    else if (key == "rswa.motor.threshold_factor")
        cfg.metrics.motor.events.threshold_factor = as_double();
    else if (key == "rswa.motor.min_duration_s")
        cfg.metrics.motor.events.min_duration_s = as_double();
    else if (key == "rswa.motor.merge_gap_s") cfg.metrics.motor.events.merge_gap_s = as_double();
    else if (key == "rswa.motor.baseline_window_min")
        cfg.metrics.motor.baseline_window_min = as_double();
    else if (key == "rswa.ratio_epsilon") cfg.metrics.ratio_epsilon = as_double();
    else if (key == "staging.n_trees") cfg.staging_n_trees = as_size();
    else if (key == "staging.seed") cfg.staging_seed = as_u64();
    else if (key == "cv.folds") cfg.folds = static_cast<int>(parse_int(value, key));
    else if (key == "cv.fold_seed") cfg.fold_seed = as_u64();
    else if (key == "detect.n_trees") cfg.detect_n_trees = as_size();
    else if (key == "detect.seed") cfg.detect_seed = as_u64();
    else if (key == "detect.importance_repetitions") cfg.importance_repetitions = as_size();
    else if (key == "synth.n_hc") cfg.synth_n_hc = as_size();
    else if (key == "synth.n_rbd") cfg.synth_n_rbd = as_size();
    else if (key == "synth.hours") cfg.synth_hours = as_double();
    else if (key == "synth.seed") cfg.synth_seed = as_u64();
    else if (key == "jobs") cfg.jobs = static_cast<unsigned>(parse_int(value, key));
    else throw ConfigError("unknown configuration key '" + key + "'");
}

inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    long long line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
        try {
            apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ParseError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

inline void validate_paths(const RunConfig& cfg, bool need_manifest, bool need_store) {
    if (need_manifest) {
        if (cfg.dataset_manifest.empty()) throw ConfigError("dataset.manifest is required");
        if (!std::filesystem::exists(cfg.dataset_manifest))
            throw ConfigError("dataset manifest does not exist: " + cfg.dataset_manifest);
    }
    if (need_store) {
        if (cfg.store_dir.empty()) throw ConfigError("store.dir is required");
        if (!std::filesystem::exists(cfg.store_dir))
            throw ConfigError("store does not exist: " + cfg.store_dir);
    }
}

}  // namespace rbd
