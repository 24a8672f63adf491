#pragma once

// Normalized dataset store. `ingest` parses each manifest pair (EDF +
// hypnogram sidecar), selects the limited montage, resamples to 200 Hz and
// rewrites the subject as a 3-channel EDF plus an AASM sidecar. Per-file
// failures are collected rather than aborting the batch; recordings shorter
// than five minutes are rejected as degenerate.

#include <filesystem>
#include <string>
#include <vector>

#include "rbd/config.hpp"
#include "rbd/edf.hpp"
#include "rbd/errors.hpp"
#include "rbd/hypnogram_io.hpp"
#include "rbd/montage.hpp"
#include "rbd/resample.hpp"
#include "rbd/types.hpp"
#include "rbd/util/io.hpp"
#include "rbd/util/parallel.hpp"
#include "rbd/util/strings.hpp"

namespace rbd::store {

struct ManifestEntry {
    std::string subject_id;
    std::string cohort;
    std::string edf_path;
    std::string hypnogram_path;
};

inline std::vector<ManifestEntry> parse_manifest(const std::string& text) {
    std::vector<ManifestEntry> out;
    long long line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const auto parts = split(line, ',');
        if (parts.size() != 4)
            throw ParseError("manifest line " + std::to_string(line_no) +
                             ": expected subject_id,cohort,edf_path,hypnogram_path");
        out.push_back({trim(parts[0]), trim(parts[1]), trim(parts[2]), trim(parts[3])});
    }
    return out;
}

inline std::string format_manifest(const std::vector<ManifestEntry>& entries) {
    std::string s = "# subject_id,cohort,edf_path,hypnogram_path\n";
    for (const auto& e : entries)
        s += e.subject_id + "," + e.cohort + "," + e.edf_path + "," + e.hypnogram_path + "\n";
    return s;
}

struct StoredSubject {
    std::string subject_id;
    std::string cohort;
    std::filesystem::path edf_path;
    std::filesystem::path hyp_path;
};

struct QualityRow {
    std::string subject_id;
    double original_duration_s = 0.0;
    double dropped_tail_s = 0.0;     // trailing partial epoch discarded on the grid
    std::string montage;             // chosen source labels
    std::size_t unknown_labels = 0;  // hypnogram labels mapped to UNSCORED
    std::size_t imputed_values = 0;  // filled at feature extraction
};

struct IngestResult {
    std::vector<StoredSubject> stored;
    std::vector<QualityRow> quality;
    std::vector<std::string> errors;  // "subject: what went wrong"
};

// Load one stored subject as a montage triplet + manual hypnogram.
struct LoadedSubject {
    std::string subject_id;
    std::string cohort;
    MontageTriplet triplet;
    Hypnogram manual;
};

inline LoadedSubject load_subject(const StoredSubject& s) {
    LoadedSubject out;
    out.subject_id = s.subject_id;
    out.cohort = s.cohort;
    const auto rec = edf::parse(read_file(s.edf_path));
    if (rec.channels.size() != 3) throw ParseError("store EDF must have exactly 3 channels");
    const double dur = rec.record_duration;
    out.triplet.eeg = {rec.channels[0].rate(dur), rec.channels[0].samples};
    out.triplet.eog = {rec.channels[1].rate(dur), rec.channels[1].samples};
    out.triplet.emg = {rec.channels[2].rate(dur), rec.channels[2].samples};
    out.triplet.source_labels = {rec.channels[0].label, rec.channels[1].label,
                                 rec.channels[2].label};
    const auto sidecar = parse_hypnogram_sidecar(read_text_file(s.hyp_path));
    out.manual = sidecar.hypnogram;
    return out;
}

inline IngestResult ingest(const std::vector<ManifestEntry>& entries,
                           const std::filesystem::path& store_dir, const RunConfig& cfg) {
    if (entries.empty()) throw ArgumentError("ingest: empty manifest (no subjects)");
    std::filesystem::create_directories(store_dir);

    IngestResult result;
    result.stored.resize(entries.size());
    result.quality.resize(entries.size());
    std::vector<std::string> errors(entries.size());

    parallel_for(entries.size(), cfg.effective_jobs(), [&](std::size_t i) {
        const auto& e = entries[i];
        try {
            const auto rec = edf::parse(read_file(e.edf_path));
            if (rec.duration() < cfg.min_recording_s)
                throw ArgumentError("recording shorter than " +
                                    std::to_string(int(cfg.min_recording_s)) + " s");
            auto triplet = select_montage(rec, cfg.montage);
            triplet = resample_triplet(triplet, cfg.target_rate_hz);

            const auto sidecar = parse_hypnogram_sidecar(read_text_file(e.hypnogram_path));

            Recording out;
            out.patient_id = e.subject_id;
            out.recording_id = "normalized";
            out.start_date = rec.start_date;
            out.start_time = rec.start_time;
            out.record_duration = 30.0;
            const auto spr = static_cast<long long>(30.0 * cfg.target_rate_hz);
            const auto n_records = static_cast<long long>(triplet.eeg.samples.size()) / spr;
            if (n_records < 1) throw ArgumentError("recording shorter than one epoch");
            out.n_records = n_records;
            const auto keep = static_cast<std::size_t>(n_records * spr);
            auto channel = [&](const char* label, std::vector<double> samples) {
                samples.resize(keep);
                return edf::make_channel(label, "uV", std::move(samples), spr);
            };
            out.channels.push_back(channel("EEG", triplet.eeg.samples));
            out.channels.push_back(channel("EOG", triplet.eog.samples));
            out.channels.push_back(channel("EMG", triplet.emg.samples));

            const auto edf_path = store_dir / (e.subject_id + ".edf");
            const auto hyp_path = store_dir / (e.subject_id + ".hyp");
            write_file(edf_path, edf::write(out));
            write_file(hyp_path, format_hypnogram_sidecar(sidecar.hypnogram, sidecar.source));

            result.stored[i] = {e.subject_id, e.cohort, edf_path, hyp_path};
            const double dropped_s =
                double(triplet.eeg.samples.size() - keep) / cfg.target_rate_hz;
            result.quality[i] = {e.subject_id, rec.duration(), dropped_s,
                                 triplet.source_labels[0] + " | " + triplet.source_labels[1] +
                                     " | " + triplet.source_labels[2],
                                 sidecar.unknown_labels, 0};
        } catch (const Error& err) {
            errors[i] = e.subject_id + ": " + err.what();
        }
    });

    IngestResult cleaned;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!errors[i].empty()) {
            cleaned.errors.push_back(errors[i]);
            continue;
        }
        cleaned.stored.push_back(result.stored[i]);
        cleaned.quality.push_back(result.quality[i]);
    }

    // store index
    std::string index = "# subject_id,cohort,edf,hyp\n";
    for (const auto& s : cleaned.stored)
        index += s.subject_id + "," + s.cohort + "," + s.edf_path.filename().string() + "," +
                 s.hyp_path.filename().string() + "\n";
    write_file(store_dir / "store.csv", index);
    return cleaned;
}

inline std::vector<StoredSubject> load_store(const std::filesystem::path& store_dir) {
    const auto index_path = store_dir / "store.csv";
    if (!std::filesystem::exists(index_path))
        throw ParseError("not a dataset store (missing store.csv): " + store_dir.string());
    std::vector<StoredSubject> out;
    for (const auto& raw : split(read_text_file(index_path), '\n')) {
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const auto parts = split(line, ',');
        if (parts.size() != 4) throw ParseError("malformed store index line: " + line);
        out.push_back({parts[0], parts[1], store_dir / parts[2], store_dir / parts[3]});
    }
    return out;
}

inline std::string quality_csv(const std::vector<QualityRow>& rows) {
    std::string s =
        "subject_id,original_duration_s,dropped_tail_s,montage,unknown_stage_labels,"
        "imputed_values\n";
    for (const auto& r : rows)
        s += r.subject_id + "," + format_double(r.original_duration_s) + "," +
             format_double(r.dropped_tail_s) + "," + r.montage + "," +
             std::to_string(r.unknown_labels) + "," + std::to_string(r.imputed_values) + "\n";
    return s;
}

}  // namespace rbd::store
