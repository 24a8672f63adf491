#pragma once

// Five-class sleep staging on top of the random forest, plus agreement
// statistics: Cohen's kappa, one-vs-rest per-stage metrics with subject
// level mean +- sd aggregation, and subject-stratified cross-validation
// with a hard train/test leakage guard. UNSCORED epochs are excluded
// pairwise from training and from every agreement statistic.

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rbd/errors.hpp"
#include "rbd/features/matrix.hpp"
#include "rbd/forest/folds.hpp"
#include "rbd/forest/forest.hpp"
#include "rbd/types.hpp"
#include "rbd/util/stats.hpp"

namespace rbd::staging {

inline const std::vector<std::string> kStageClasses = {"W", "N1", "N2", "N3", "REM"};

inline std::uint32_t stage_class(Stage s) {
    if (s == Stage::Unscored) throw ArgumentError("UNSCORED has no class index");
    return static_cast<std::uint32_t>(s);
}

inline Stage class_stage(std::uint32_t c) {
    if (c >= 5) throw ArgumentError("stage class out of range");
    return static_cast<Stage>(c);
}

// One stage per feature row; an empty matrix maps to an empty hypnogram.
inline Hypnogram stage_recording(const forest::TrainedForest& f,
                                 const features::FeatureMatrix& x) {
    if (f.schema_hash != x.schema.hash())
        throw SchemaError("stage_recording: model/features schema mismatch");
    Hypnogram h;
    h.stages.reserve(x.n_rows());
    for (std::size_t i = 0; i < x.n_rows(); ++i)
        h.stages.push_back(class_stage(static_cast<std::uint32_t>(f.predict(x.row(i)).label)));
    return h;
}

// Chance-corrected agreement; pairs with UNSCORED on either side are
// dropped first.
inline double cohens_kappa(const Hypnogram& a, const Hypnogram& b) {
    if (a.stages.size() != b.stages.size())
        throw ArgumentError("cohens_kappa: length mismatch");
    std::array<std::array<double, 5>, 5> joint{};
    double n = 0.0;
    for (std::size_t i = 0; i < a.stages.size(); ++i) {
        if (a.stages[i] == Stage::Unscored || b.stages[i] == Stage::Unscored) continue;
        joint[stage_class(a.stages[i])][stage_class(b.stages[i])] += 1.0;
        n += 1.0;
    }
    if (n == 0.0) throw UndefinedError("cohens_kappa: no usable epoch pairs");
    // counts are summed before the single division so the hand cases
    // (identical raters -> 1, symmetric full disagreement -> -1) are exact
    double diag = 0.0, cross = 0.0;
    for (std::size_t s = 0; s < 5; ++s) {
        diag += joint[s][s];
        double row = 0.0, col = 0.0;
        for (std::size_t t = 0; t < 5; ++t) {
            row += joint[s][t];
            col += joint[t][s];
        }
        cross += row * col;
    }
    const double po = diag / n;
    const double pe = cross / (n * n);
    if (pe >= 1.0) return 1.0;  // both raters constant and equal
    return (po - pe) / (1.0 - pe);
}

using Confusion = std::array<std::array<std::size_t, 5>, 5>;  // [truth][pred]

inline Confusion confusion_counts(const Hypnogram& pred, const Hypnogram& truth) {
    if (pred.stages.size() != truth.stages.size())
        throw ArgumentError("confusion: length mismatch");
    Confusion c{};
    for (std::size_t i = 0; i < truth.stages.size(); ++i) {
        if (pred.stages[i] == Stage::Unscored || truth.stages[i] == Stage::Unscored) continue;
        ++c[stage_class(truth.stages[i])][stage_class(pred.stages[i])];
    }
    return c;
}

// One-vs-rest metrics for a single stage; absent denominators are missing.
struct StageScores {
    std::optional<double> accuracy, sensitivity, specificity, precision, f1;
};

inline StageScores one_vs_rest(const Confusion& c, std::size_t stage) {
    double tp = 0, fn = 0, fp = 0, tn = 0;
    for (std::size_t t = 0; t < 5; ++t)
        for (std::size_t p = 0; p < 5; ++p) {
            const double v = double(c[t][p]);
            if (t == stage && p == stage) tp += v;
            else if (t == stage) fn += v;
            else if (p == stage) fp += v;
            else tn += v;
        }
    StageScores s;
    const double n = tp + fn + fp + tn;
    if (n > 0) s.accuracy = (tp + tn) / n;
    if (tp + fn > 0) s.sensitivity = tp / (tp + fn);
    if (tn + fp > 0) s.specificity = tn / (tn + fp);
    if (tp + fp > 0) s.precision = tp / (tp + fp);
    if (2 * tp + fp + fn > 0) s.f1 = 2 * tp / (2 * tp + fp + fn);
    return s;
}

struct SubjectStageMetrics {
    std::array<StageScores, 5> per_stage;
    Confusion confusion{};
};

inline SubjectStageMetrics stage_metrics(const Hypnogram& pred, const Hypnogram& truth) {
    SubjectStageMetrics m;
    m.confusion = confusion_counts(pred, truth);
    for (std::size_t s = 0; s < 5; ++s) m.per_stage[s] = one_vs_rest(m.confusion, s);
    return m;
}

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
    std::size_t n = 0;
};

inline MeanSd aggregate(const std::vector<std::optional<double>>& values) {
    std::vector<double> present;
    for (const auto& v : values)
        if (v) present.push_back(*v);
    MeanSd out;
    out.n = present.size();
    if (!present.empty()) {
        out.mean = stats::mean(present);
        out.sd = stats::sample_sd(present);
    }
    return out;
}

inline const std::array<const char*, 5> kMetricNames = {"accuracy", "sensitivity", "specificity",
                                                        "precision", "f1"};

// Cohort-level report: pooled confusion/kappa plus per-stage metric means
// across subjects (missing stages excluded from the macro average).
struct StageReport {
    std::string cohort;
    std::size_t n_subjects = 0;
    Confusion confusion{};
    double kappa = 0.0;                         // pooled epochs
    std::array<std::array<MeanSd, 5>, 5> stage_metric;  // [metric][stage]
    std::array<MeanSd, 5> macro;                        // subject-level macro averages

    std::size_t scored_epochs() const {
        std::size_t n = 0;
        for (const auto& row : confusion)
            for (std::size_t v : row) n += v;
        return n;
    }
};

inline StageReport build_report(const std::string& cohort,
                                const std::vector<SubjectStageMetrics>& subjects,
                                const std::vector<std::pair<Hypnogram, Hypnogram>>& pairs) {
    StageReport r;
    r.cohort = cohort;
    r.n_subjects = subjects.size();
    Hypnogram pooled_pred, pooled_truth;
    for (const auto& [pred, truth] : pairs) {
        pooled_pred.stages.insert(pooled_pred.stages.end(), pred.stages.begin(),
                                  pred.stages.end());
        pooled_truth.stages.insert(pooled_truth.stages.end(), truth.stages.begin(),
                                   truth.stages.end());
    }
    for (const auto& m : subjects)
        for (std::size_t t = 0; t < 5; ++t)
            for (std::size_t p = 0; p < 5; ++p) r.confusion[t][p] += m.confusion[t][p];
    r.kappa = cohens_kappa(pooled_pred, pooled_truth);

    for (std::size_t metric = 0; metric < 5; ++metric) {
        for (std::size_t stage = 0; stage < 5; ++stage) {
            std::vector<std::optional<double>> vals;
            for (const auto& m : subjects) {
                const auto& s = m.per_stage[stage];
                const std::array<std::optional<double>, 5> by_metric = {
                    s.accuracy, s.sensitivity, s.specificity, s.precision, s.f1};
                vals.push_back(by_metric[metric]);
            }
            r.stage_metric[metric][stage] = aggregate(vals);
        }
        std::vector<std::optional<double>> macro_vals;
        for (const auto& m : subjects) {
            std::vector<double> present;
            for (std::size_t stage = 0; stage < 5; ++stage) {
                const auto& s = m.per_stage[stage];
                const std::array<std::optional<double>, 5> by_metric = {
                    s.accuracy, s.sensitivity, s.specificity, s.precision, s.f1};
                if (by_metric[metric]) present.push_back(*by_metric[metric]);
            }
            macro_vals.push_back(present.empty() ? std::optional<double>{}
                                                 : std::optional<double>{stats::mean(present)});
        }
        r.macro[metric] = aggregate(macro_vals);
    }
    return r;
}

// --- cross-validated staging ---------------------------------------------

struct CvSubject {
    std::string subject_id;
    std::string cohort;
    features::FeatureMatrix features;
    Hypnogram manual;
};

struct CvConfig {
    int k = 10;
    std::uint64_t fold_seed = 1;
    forest::TrainConfig train;
    unsigned jobs = 1;
};

struct CvResult {
    forest::FoldPlan plan;
    std::map<std::string, Hypnogram> predicted;  // automatic staging per subject
    StageReport combined;
    std::vector<StageReport> per_cohort;
};

inline CvResult run_cv(const std::vector<CvSubject>& dataset, const CvConfig& config) {
    if (dataset.empty()) throw ArgumentError("run_cv: empty dataset");
    const std::size_t m = dataset.front().features.schema.size();
    const std::uint64_t schema_hash = dataset.front().features.schema.hash();
    std::vector<std::string> subjects, cohorts;
    for (const auto& s : dataset) {
        s.features.schema.require_match(dataset.front().features.schema, "run_cv");
        if (s.features.n_rows() != s.manual.stages.size())
            throw ArgumentError("run_cv: features/hypnogram length mismatch for " + s.subject_id);
        subjects.push_back(s.subject_id);
        cohorts.push_back(s.cohort);
    }

    CvResult result;
    result.plan = forest::make_folds(subjects, cohorts, config.k, config.fold_seed);

    for (int fold = 0; fold < config.k; ++fold) {
        std::vector<double> train_values;
        std::vector<std::uint32_t> train_labels;
        std::vector<const CvSubject*> test_subjects;
        std::set<std::string> train_ids, test_ids;
        for (const auto& s : dataset) {
            if (result.plan.assignment.at(s.subject_id) == fold) {
                test_subjects.push_back(&s);
                test_ids.insert(s.subject_id);
                continue;
            }
            train_ids.insert(s.subject_id);
            for (std::size_t e = 0; e < s.features.n_rows(); ++e) {
                if (s.manual.stages[e] == Stage::Unscored) continue;
                const auto row = s.features.row(e);
                train_values.insert(train_values.end(), row.begin(), row.end());
                train_labels.push_back(stage_class(s.manual.stages[e]));
            }
        }
        // leakage guard: asserted on every fold, not sampled
        for (const auto& id : test_ids)
            if (train_ids.count(id))
                throw InternalError("run_cv: subject " + id +
                                    " appears in train and test of fold " + std::to_string(fold));
        if (train_labels.empty())
            throw ArgumentError("run_cv: fold " + std::to_string(fold) + " has no training epochs");

        forest::TrainConfig tc = config.train;
        tc.jobs = config.jobs;
        tc.seed = config.train.seed + static_cast<std::uint64_t>(fold);
        auto trained = forest::train({train_values.data(), train_labels.size(), m}, train_labels,
                                     kStageClasses, tc);
        trained.forest.schema_hash = schema_hash;

        for (const auto* t : test_subjects)
            result.predicted[t->subject_id] = stage_recording(trained.forest, t->features);
    }

    // reports
    std::map<std::string, std::vector<SubjectStageMetrics>> by_cohort_metrics;
    std::map<std::string, std::vector<std::pair<Hypnogram, Hypnogram>>> by_cohort_pairs;
    std::vector<SubjectStageMetrics> all_metrics;
    std::vector<std::pair<Hypnogram, Hypnogram>> all_pairs;
    std::vector<std::string> cohort_order;
    for (const auto& s : dataset) {
        const auto& pred = result.predicted.at(s.subject_id);
        const auto m_s = stage_metrics(pred, s.manual);
        if (!by_cohort_metrics.count(s.cohort)) cohort_order.push_back(s.cohort);
        by_cohort_metrics[s.cohort].push_back(m_s);
        by_cohort_pairs[s.cohort].emplace_back(pred, s.manual);
        all_metrics.push_back(m_s);
        all_pairs.emplace_back(pred, s.manual);
    }
    result.combined = build_report("combined", all_metrics, all_pairs);
    for (const auto& cohort : cohort_order)
        result.per_cohort.push_back(
            build_report(cohort, by_cohort_metrics[cohort], by_cohort_pairs[cohort]));
    return result;
}

}  // namespace rbd::staging
