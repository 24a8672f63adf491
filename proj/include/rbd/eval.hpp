#pragma once

// Manual-vs-automatic metric correlation and the subject-level detection
// cross-validation that fills the comparison table: three single-metric
// threshold rules plus the two forest variants, per staging arm, all on one
// shared fold plan.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rbd/detect.hpp"
#include "rbd/errors.hpp"
#include "rbd/forest/folds.hpp"
#include "rbd/forest/importance.hpp"
#include "rbd/rswa.hpp"
#include "rbd/util/stats.hpp"

namespace rbd::eval {

struct CorrelationRow {
    std::string metric;
    std::optional<double> r;  // empty when fewer than 3 complete pairs
    std::size_t n = 0;
};

// Pearson r per metric between the two staging arms, matched by subject,
// missing metrics excluded pairwise.
inline std::vector<CorrelationRow> metric_correlation(
    const std::vector<rswa::SubjectMetrics>& manual,
    const std::vector<rswa::SubjectMetrics>& automatic) {
    std::map<std::string, const rswa::SubjectMetrics*> auto_by_id;
    for (const auto& m : automatic) auto_by_id[m.subject_id] = &m;
    std::size_t matched = 0;
    for (const auto& m : manual)
        if (auto_by_id.count(m.subject_id)) ++matched;
    if (matched < 3)
        throw UndefinedError("metric_correlation: need at least 3 matched subjects, got " +
                             std::to_string(matched));

    std::vector<CorrelationRow> out;
    for (const auto& name : rswa::kMetricNames) {
        std::vector<double> xs, ys;
        for (const auto& m : manual) {
            const auto it = auto_by_id.find(m.subject_id);
            if (it == auto_by_id.end()) continue;
            const auto a = rswa::metric_by_name(m, name);
            const auto b = rswa::metric_by_name(*it->second, name);
            if (!a || !b) continue;
            xs.push_back(*a);
            ys.push_back(*b);
        }
        CorrelationRow row;
        row.metric = name;
        row.n = xs.size();
        if (xs.size() >= 3) row.r = stats::pearson(xs, ys);
        out.push_back(std::move(row));
    }
    return out;
}

struct DetectionRow {
    std::string classifier;  // motor_activity | stream | atonia_index | rf_established | rf_additional
    std::string staging;     // manual | automatic
    double accuracy = 0.0;
    double sensitivity = 0.0;  // RBD recall
    double specificity = 0.0;  // HC recall
    std::size_t n = 0;
};

inline const std::vector<std::string> kDetectionRowOrder = {
    "motor_activity", "stream", "atonia_index", "rf_established", "rf_additional"};

namespace detail {

struct BinaryCounts {
    std::size_t tp = 0, fn = 0, fp = 0, tn = 0;  // RBD = positive

    void add(bool truth_rbd, bool pred_rbd) {
        if (truth_rbd && pred_rbd) ++tp;
        else if (truth_rbd) ++fn;
        else if (pred_rbd) ++fp;
        else ++tn;
    }

    DetectionRow finish(const std::string& classifier, const std::string& staging) const {
        DetectionRow r;
        r.classifier = classifier;
        r.staging = staging;
        r.n = tp + fn + fp + tn;
        r.accuracy = r.n ? double(tp + tn) / double(r.n) : 0.0;
        r.sensitivity = (tp + fn) ? double(tp) / double(tp + fn) : 0.0;
        r.specificity = (tn + fp) ? double(tn) / double(tn + fp) : 0.0;
        return r;
    }
};

}  // namespace detail

struct DetectionCvConfig {
    int k = 10;
    std::uint64_t fold_seed = 7;
    std::uint64_t train_seed = 8;
    std::size_t n_trees = 500;
    unsigned jobs = 1;
};

// Cross-validated detection results for one staging arm. Only complete
// subjects participate; the caller reports incomplete ones separately.
inline std::vector<DetectionRow> detection_cv(const std::vector<rswa::SubjectMetrics>& metrics,
                                              const std::string& staging_arm,
                                              const forest::FoldPlan& plan,
                                              const DetectionCvConfig& config) {
    std::map<std::string, detail::BinaryCounts> counts;
    for (const auto& name : kDetectionRowOrder) counts[name] = {};

    for (int fold = 0; fold < plan.k; ++fold) {
        std::vector<rswa::SubjectMetrics> train_m;
        std::vector<std::string> train_c;
        std::vector<const rswa::SubjectMetrics*> test;
        for (const auto& m : metrics) {
            if (!plan.assignment.count(m.subject_id))
                throw ArgumentError("detection_cv: subject missing from fold plan: " +
                                    m.subject_id);
            if (plan.assignment.at(m.subject_id) == fold) test.push_back(&m);
            else {
                train_m.push_back(m);
                train_c.push_back(m.cohort);
            }
        }
        if (test.empty()) continue;
        if (train_m.empty())
            throw ArgumentError("detection_cv: fold " + std::to_string(fold) +
                                " has no training subjects (too few complete metric records)");

        // single-metric threshold rules
        for (const auto& name : {std::string("motor_activity"), std::string("stream"),
                                 std::string("atonia_index")}) {
            const std::string metric_key = name == "atonia_index" ? "atonia_index_rem" : name;
            std::vector<double> values;
            std::vector<std::uint32_t> labels;
            for (const auto& m : train_m) {
                const auto v = rswa::metric_by_name(m, metric_key);
                if (!v) continue;
                values.push_back(*v);
                labels.push_back(detect::cohort_class(m.cohort));
            }
            const auto rule = detect::fit_threshold(metric_key, values, labels);
            for (const auto* m : test) {
                const auto v = rswa::metric_by_name(*m, metric_key);
                if (!v) continue;
                counts[name].add(m->cohort == "RBD", rule.predict(*v) == "RBD");
            }
        }

        // forest variants
        for (auto variant : {detect::Variant::Established, detect::Variant::Additional}) {
            const auto f = detect::train_detector(train_m, train_c, variant,
                                                  config.train_seed + std::uint64_t(fold),
                                                  config.n_trees, config.jobs);
            const std::string name = variant == detect::Variant::Established ? "rf_established"
                                                                             : "rf_additional";
            for (const auto* m : test)
                counts[name].add(m->cohort == "RBD", detect::detect(f, *m).label == "RBD");
        }
    }

    std::vector<DetectionRow> rows;
    for (const auto& name : kDetectionRowOrder)
        rows.push_back(counts[name].finish(name, staging_arm));
    return rows;
}

struct ImportanceRow {
    std::string feature;
    double delta_error = 0.0;
};

// Permutation importance of the additional-variant detector, reported with
// metric names (the feature-importance figure analog).
inline std::vector<ImportanceRow> detector_importance(
    const std::vector<rswa::SubjectMetrics>& metrics, std::uint64_t seed, std::size_t n_trees,
    std::size_t repetitions = 10, unsigned jobs = 1) {
    std::vector<std::string> cohorts;
    std::vector<double> values;
    std::vector<std::uint32_t> labels;
    for (const auto& m : metrics) {
        cohorts.push_back(m.cohort);
        const auto row = detect::metric_vector(m, detect::Variant::Additional);
        values.insert(values.end(), row.begin(), row.end());
        labels.push_back(detect::cohort_class(m.cohort));
    }
    const auto f = detect::train_detector(metrics, cohorts, detect::Variant::Additional, seed,
                                          n_trees, jobs);
    const forest::DataView x{values.data(), labels.size(), rswa::kMetricNames.size()};
    const auto imp = forest::permutation_importance(f, x, labels, seed + 1, repetitions, jobs);
    std::vector<ImportanceRow> rows;
    for (std::size_t j = 0; j < rswa::kMetricNames.size(); ++j)
        rows.push_back({rswa::kMetricNames[j], imp.delta_error[j]});
    std::stable_sort(rows.begin(), rows.end(),
                     [](const ImportanceRow& a, const ImportanceRow& b) {
                         return a.delta_error > b.delta_error;
                     });
    return rows;
}

}  // namespace rbd::eval
