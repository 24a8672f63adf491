#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rbd/errors.hpp"
#include "rbd/util/strings.hpp"

namespace rbd {

// AASM sleep stages plus a catch-all for unscored/unknown epochs.
enum class Stage : std::uint8_t { W = 0, N1, N2, N3, Rem, Unscored };

// Scoreable classes, in the fixed order used for tie-breaking and reports.
inline constexpr std::array<Stage, 5> kScoredStages = {Stage::W, Stage::N1, Stage::N2,
                                                       Stage::N3, Stage::Rem};

inline const char* stage_name(Stage s) {
    switch (s) {
        case Stage::W: return "W";
        case Stage::N1: return "N1";
        case Stage::N2: return "N2";
        case Stage::N3: return "N3";
        case Stage::Rem: return "REM";
        default: return "UNSCORED";
    }
}

// Maps both AASM and R&K labels onto AASM stages: S3/S4 -> N3, S0 -> W,
// S1 -> N1, S2 -> N2, REM unchanged. Anything else (MT, artifacts, typos)
// maps to UNSCORED; `unknown` is incremented when that happens.
inline Stage stage_from_label(std::string_view label, std::size_t* unknown = nullptr) {
    const std::string s = to_upper(trim(label));
    if (s == "W" || s == "WAKE" || s == "S0") return Stage::W;
    if (s == "N1" || s == "S1") return Stage::N1;
    if (s == "N2" || s == "S2") return Stage::N2;
    if (s == "N3" || s == "S3" || s == "S4") return Stage::N3;
    if (s == "REM" || s == "R") return Stage::Rem;
    if (s == "UNSCORED" || s == "?") return Stage::Unscored;
    if (unknown) ++*unknown;
    return Stage::Unscored;
}

// Per-30s-epoch stage sequence aligned to a recording.
struct Hypnogram {
    double epoch_len = 30.0;
    std::vector<Stage> stages;

    std::size_t count(Stage s) const {
        std::size_t n = 0;
        for (Stage x : stages)
            if (x == s) ++n;
        return n;
    }
};

struct MapResult {
    Hypnogram hypnogram;
    std::size_t unknown_labels = 0;
};

inline MapResult map_rk_to_aasm(const std::vector<std::string>& labels, double epoch_len = 30.0) {
    MapResult out;
    out.hypnogram.epoch_len = epoch_len;
    out.hypnogram.stages.reserve(labels.size());
    for (const auto& label : labels)
        out.hypnogram.stages.push_back(stage_from_label(label, &out.unknown_labels));
    return out;
}

// Idempotent on already-AASM input.
inline Hypnogram map_rk_to_aasm(const Hypnogram& h) { return h; }

// One EDF signal in physical units (µV for the channels this library cares
// about). Scaling metadata is kept so a parsed recording can be written back
// with bit-identical digital samples.
struct Channel {
    std::string label;
    std::string transducer;
    std::string unit;
    double phys_min = -32768.0;
    double phys_max = 32767.0;
    int dig_min = -32768;
    int dig_max = 32767;
    std::string prefilter;
    long long samples_per_record = 0;
    std::vector<double> samples;  // physical units

    double rate(double record_duration) const {
        return static_cast<double>(samples_per_record) / record_duration;
    }
};

struct Recording {
    std::string patient_id;
    std::string recording_id;
    std::string start_date = "01.01.00";  // EDF dd.mm.yy
    std::string start_time = "00.00.00";  // EDF hh.mm.ss
    double record_duration = 1.0;         // seconds per data record
    long long n_records = 0;
    std::vector<Channel> channels;

    double duration() const { return static_cast<double>(n_records) * record_duration; }

    const Channel* find(std::string_view label) const {
        for (const auto& c : channels)
            if (c.label == label) return &c;
        return nullptr;
    }
};

// A uniformly sampled signal.
struct Signal {
    double rate = 0.0;
    std::vector<double> samples;

    double duration() const { return rate > 0 ? static_cast<double>(samples.size()) / rate : 0.0; }
};

// The limited montage the pipeline runs on: one EEG, one EOG (ROC - LOC),
// one chin EMG.
struct MontageTriplet {
    Signal eeg;
    Signal eog;
    Signal emg;
    std::array<std::string, 3> source_labels;  // eeg, eog, emg provenance
};

}  // namespace rbd
