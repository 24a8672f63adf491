#pragma once

// End-to-end run: store -> preprocess -> features -> staging CV ->
// RSWA metrics under both staging arms -> detection CV -> correlation ->
// report. Every stage persists its artifacts under the output directory and
// the report manifest fingerprints all of them, so a rerun with identical
// configuration is byte-comparable through one file.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rbd/config.hpp"
#include "rbd/detect.hpp"
#include "rbd/dsp/preprocess.hpp"
#include "rbd/eval.hpp"
#include "rbd/features/extract.hpp"
#include "rbd/forest/serialize.hpp"
#include "rbd/hypnogram_io.hpp"
#include "rbd/report.hpp"
#include "rbd/rswa.hpp"
#include "rbd/rswa_csv.hpp"
#include "rbd/staging.hpp"
#include "rbd/store.hpp"
#include "rbd/synth.hpp"
#include "rbd/util/io.hpp"
#include "rbd/util/parallel.hpp"

namespace rbd::pipeline {

struct PipelineResult {
    staging::CvResult staging_cv;
    std::vector<rswa::SubjectMetrics> manual_metrics;
    std::vector<rswa::SubjectMetrics> auto_metrics;
    std::vector<std::string> flagged;  // subjects with missing metrics, per arm
    std::vector<eval::CorrelationRow> correlations;
    std::vector<eval::DetectionRow> detection;  // both staging arms
    std::vector<eval::ImportanceRow> importance;
    std::string report_manifest;
};

// --- individual stages ------------------------------------------------------

// Generate a synthetic cohort: EDFs + sidecars + dataset manifest.
inline std::filesystem::path run_synth(const RunConfig& cfg, const std::filesystem::path& out) {
    std::filesystem::create_directories(out);
    synth::CohortSpec spec;
    spec.n_hc = cfg.synth_n_hc;
    spec.n_rbd = cfg.synth_n_rbd;
    spec.hours = cfg.synth_hours;
    spec.seed = cfg.synth_seed;
    const auto members = synth::cohort_members(spec);

    std::vector<store::ManifestEntry> entries(members.size());
    parallel_for(members.size(), cfg.effective_jobs(), [&](std::size_t i) {
        const auto subject = synth::generate_subject(members[i].profile, members[i].subject_id);
        const auto edf_path = out / (members[i].subject_id + ".edf");
        const auto hyp_path = out / (members[i].subject_id + ".hyp");
        write_file(edf_path, edf::write(subject.recording));
        write_file(hyp_path, format_hypnogram_sidecar(subject.hypnogram, "manual"));
        entries[i] = {members[i].subject_id, members[i].cohort, edf_path.string(),
                      hyp_path.string()};
    });
    const auto manifest_path = out / "manifest.csv";
    write_file(manifest_path, store::format_manifest(entries));
    return manifest_path;
}

struct ExtractedSubject {
    store::StoredSubject stored;
    features::FeatureMatrix matrix;
    Hypnogram manual;
    std::size_t imputed_values = 0;
};

// Load, filter and extract one stored subject. The manual hypnogram is
// aligned to the epoch grid (truncated or padded with UNSCORED).
inline ExtractedSubject extract_subject(const store::StoredSubject& s, const RunConfig& cfg,
                                        unsigned jobs) {
    ExtractedSubject out;
    out.stored = s;
    auto loaded = store::load_subject(s);
    const auto filtered = dsp::apply_preprocessing(loaded.triplet, cfg.filter);
    auto extracted = features::extract_all(filtered, s.subject_id, jobs);
    out.matrix = std::move(extracted.matrix);
    out.imputed_values = extracted.quality.imputed_values;
    out.manual = std::move(loaded.manual);
    out.manual.stages.resize(out.matrix.n_rows(), Stage::Unscored);
    return out;
}

// Preprocessed EMG only (for the metric computations).
inline Signal load_filtered_emg(const store::StoredSubject& s, const RunConfig& cfg) {
    const auto loaded = store::load_subject(s);
    const auto kernels = dsp::make_preprocess_kernels(loaded.triplet.emg.rate, cfg.filter);
    return {loaded.triplet.emg.rate, dsp::apply_zero_phase(loaded.triplet.emg.samples, kernels.emg)};
}

// --- the full pipeline ------------------------------------------------------

inline PipelineResult run_pipeline(const RunConfig& cfg) {
    const std::filesystem::path out(cfg.out_dir);
    const auto stored = store::load_store(cfg.store_dir);
    if (stored.size() < static_cast<std::size_t>(cfg.folds))
        throw ArgumentError("pipeline: " + std::to_string(stored.size()) +
                            " subjects but cv.folds=" + std::to_string(cfg.folds));

    const unsigned jobs = cfg.effective_jobs();

    // 1) features
    std::vector<ExtractedSubject> subjects(stored.size());
    parallel_for(stored.size(), jobs, [&](std::size_t i) {
        subjects[i] = extract_subject(stored[i], cfg, 1);
    });
    {
        std::string quality = "subject_id,imputed_values\n";
        for (const auto& s : subjects) {
            write_file(out / "features" / (s.stored.subject_id + ".fmat"),
                       features::to_binary(s.matrix));
            write_file(out / "features" / (s.stored.subject_id + ".csv"),
                       features::to_csv(s.matrix));
            quality += s.stored.subject_id + "," + std::to_string(s.imputed_values) + "\n";
        }
        write_file(out / "features" / "quality.csv", quality);
    }

    PipelineResult result;

    // 2) staging cross-validation
    {
        std::vector<staging::CvSubject> dataset;
        for (auto& s : subjects) {
            staging::CvSubject cv;
            cv.subject_id = s.stored.subject_id;
            cv.cohort = s.stored.cohort;
            cv.features = s.matrix;
            cv.manual = s.manual;
            dataset.push_back(std::move(cv));
        }
        staging::CvConfig cv_cfg;
        cv_cfg.k = cfg.folds;
        cv_cfg.fold_seed = cfg.fold_seed;
        cv_cfg.train.n_trees = cfg.staging_n_trees;
        cv_cfg.train.seed = cfg.staging_seed;
        cv_cfg.jobs = jobs;
        result.staging_cv = staging::run_cv(dataset, cv_cfg);

        for (const auto& [id, hyp] : result.staging_cv.predicted)
            write_file(out / "staging" / (id + ".hyp"),
                       format_hypnogram_sidecar(hyp, "automatic"));
    }

    // 3) RSWA + architecture metrics under both staging arms
    {
        std::vector<rswa::SubjectMetrics> manual(subjects.size()), autom(subjects.size());
        parallel_for(subjects.size(), jobs, [&](std::size_t i) {
            const auto& s = subjects[i];
            const Signal emg = load_filtered_emg(s.stored, cfg);
            manual[i] = rswa::assemble(s.stored.subject_id, s.stored.cohort, emg, s.manual,
                                       "manual", cfg.metrics);
            autom[i] = rswa::assemble(s.stored.subject_id, s.stored.cohort, emg,
                                      result.staging_cv.predicted.at(s.stored.subject_id),
                                      "automatic", cfg.metrics);
        });
        result.manual_metrics = std::move(manual);
        result.auto_metrics = std::move(autom);
        for (const auto& arm : {&result.manual_metrics, &result.auto_metrics})
            for (const auto& m : *arm)
                if (!m.complete())
                    result.flagged.push_back(m.subject_id + " (" + m.staging_source + ")");

        std::vector<rswa::SubjectMetrics> all = result.manual_metrics;
        all.insert(all.end(), result.auto_metrics.begin(), result.auto_metrics.end());
        write_file(out / "metrics" / "subject_metrics.csv", rswa::to_csv(all));
    }

    // 4) metric correlation across arms
    result.correlations = eval::metric_correlation(result.manual_metrics, result.auto_metrics);

    // 5) detection CV on subjects complete under both arms (one shared plan)
    {
        std::map<std::string, bool> complete;
        for (const auto& m : result.manual_metrics) complete[m.subject_id] = m.complete();
        for (const auto& m : result.auto_metrics)
            complete[m.subject_id] = complete[m.subject_id] && m.complete();

        std::vector<std::string> ids, cohorts;
        std::vector<rswa::SubjectMetrics> manual_in, auto_in;
        for (const auto& m : result.manual_metrics) {
            if (!complete[m.subject_id]) continue;
            ids.push_back(m.subject_id);
            cohorts.push_back(m.cohort);
            manual_in.push_back(m);
        }
        for (const auto& m : result.auto_metrics)
            if (complete[m.subject_id]) auto_in.push_back(m);

        const auto plan = forest::make_folds(ids, cohorts, cfg.folds, cfg.fold_seed + 1);
        eval::DetectionCvConfig dc;
        dc.k = cfg.folds;
        dc.train_seed = cfg.detect_seed;
        dc.n_trees = cfg.detect_n_trees;
        dc.jobs = jobs;
        result.detection = eval::detection_cv(manual_in, "manual", plan, dc);
        const auto auto_rows = eval::detection_cv(auto_in, "automatic", plan, dc);
        result.detection.insert(result.detection.end(), auto_rows.begin(), auto_rows.end());

        // full-data models + importance (manual arm)
        std::vector<std::string> manual_cohorts;
        for (const auto& m : manual_in) manual_cohorts.push_back(m.cohort);
        for (auto variant : {detect::Variant::Established, detect::Variant::Additional}) {
            const auto f = detect::train_detector(manual_in, manual_cohorts, variant,
                                                  cfg.detect_seed, cfg.detect_n_trees, jobs);
            const char* name =
                variant == detect::Variant::Established ? "established" : "additional";
            write_file(out / "detection" / "models" / (std::string(name) + ".json"),
                       forest::to_json(f));
        }
        result.importance = eval::detector_importance(manual_in, cfg.detect_seed + 17,
                                                      cfg.detect_n_trees,
                                                      cfg.importance_repetitions, jobs);
    }

    // 6) report
    {
        report::ReportWriter w(out / "report");
        w.add("staging/report_combined.csv", report::staging_report_csv(result.staging_cv.combined));
        w.add("staging/report_combined.txt",
              report::staging_report_text(result.staging_cv.combined));
        w.add("staging/confusion_combined.csv",
              report::confusion_csv(result.staging_cv.combined.confusion));
        w.add("staging/confusion_combined.svg",
              report::svg_confusion("confusion (combined)", result.staging_cv.combined.confusion));
        for (const auto& r : result.staging_cv.per_cohort) {
            w.add("staging/report_" + r.cohort + ".csv", report::staging_report_csv(r));
            w.add("staging/report_" + r.cohort + ".txt", report::staging_report_text(r));
            w.add("staging/confusion_" + r.cohort + ".csv", report::confusion_csv(r.confusion));
            w.add("staging/confusion_" + r.cohort + ".svg",
                  report::svg_confusion("confusion (" + r.cohort + ")", r.confusion));
        }

        std::vector<rswa::SubjectMetrics> all = result.manual_metrics;
        all.insert(all.end(), result.auto_metrics.begin(), result.auto_metrics.end());
        w.add("metrics/subject_metrics.csv", rswa::to_csv(all));
        w.add("metrics/correlation.csv", report::correlation_csv(result.correlations));
        for (const auto& name : rswa::kMetricNames) {
            std::vector<double> xs, ys;
            std::map<std::string, double> manual_by_id;
            for (const auto& m : result.manual_metrics) {
                const auto v = rswa::metric_by_name(m, name);
                if (v) manual_by_id[m.subject_id] = *v;
            }
            for (const auto& m : result.auto_metrics) {
                const auto v = rswa::metric_by_name(m, name);
                if (!v || !manual_by_id.count(m.subject_id)) continue;
                xs.push_back(manual_by_id.at(m.subject_id));
                ys.push_back(*v);
            }
            w.add("metrics/scatter_" + name + ".svg",
                  report::svg_scatter(name + " (manual vs automatic)", xs, ys, "manual",
                                      "automatic"));
        }

        w.add("detection/table.csv", report::detection_csv(result.detection));
        w.add("detection/importance.csv", report::importance_csv(result.importance));
        {
            std::vector<std::string> names;
            std::vector<double> values;
            for (const auto& r : result.importance) {
                names.push_back(r.feature);
                values.push_back(r.delta_error);
            }
            w.add("detection/importance.svg",
                  report::svg_bars("permutation importance (additional detector)", names, values));
        }
        if (!result.flagged.empty()) {
            std::string flagged = "subject (staging arm)\n";
            for (const auto& f : result.flagged) flagged += f + "\n";
            w.add("metrics/flagged_subjects.csv", flagged);
        }
        result.report_manifest = w.finalize();
    }
    return result;
}

}  // namespace rbd::pipeline
