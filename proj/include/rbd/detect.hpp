#pragma once

// RBD detection from per-subject metrics: two random-forest variants
// (established RSWA metrics with m_try = 2, full metric vector with
// m_try = 3) plus single-metric threshold classifiers for the comparison
// tables. Class order is fixed as {HC, RBD}.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rbd/errors.hpp"
#include "rbd/features/schema.hpp"
#include "rbd/forest/forest.hpp"
#include "rbd/rswa.hpp"

namespace rbd::detect {

inline const std::vector<std::string> kCohortClasses = {"HC", "RBD"};

enum class Variant { Established, Additional };

inline const std::vector<std::string>& variant_features(Variant v) {
    static const std::vector<std::string> established = {"atonia_index_rem", "stream",
                                                         "motor_activity"};
    return v == Variant::Established ? established : rswa::kMetricNames;
}

inline std::size_t variant_m_try(Variant v) { return v == Variant::Established ? 2 : 3; }

inline std::uint64_t variant_schema_hash(Variant v) {
    features::FeatureSchema s;
    s.names = variant_features(v);
    return s.hash();
}

inline std::uint32_t cohort_class(const std::string& cohort) {
    if (cohort == "HC") return 0;
    if (cohort == "RBD") return 1;
    throw ArgumentError("unknown cohort '" + cohort + "' (expected HC or RBD)");
}

// Feature vector in variant order; throws naming the missing metrics.
inline std::vector<double> metric_vector(const rswa::SubjectMetrics& m, Variant variant) {
    std::vector<double> out;
    std::string missing;
    for (const auto& name : variant_features(variant)) {
        const auto v = rswa::metric_by_name(m, name);
        if (!v) {
            missing += (missing.empty() ? "" : ", ") + name;
            continue;
        }
        out.push_back(*v);
    }
    if (!missing.empty())
        throw MissingMetricError("subject " + m.subject_id + " is missing: " + missing);
    return out;
}

inline forest::TrainedForest train_detector(const std::vector<rswa::SubjectMetrics>& metrics,
                                            const std::vector<std::string>& cohorts,
                                            Variant variant, std::uint64_t seed,
                                            std::size_t n_trees = 500, unsigned jobs = 1) {
    if (metrics.size() != cohorts.size()) throw ArgumentError("train_detector: size mismatch");
    std::size_t hc = 0, rbd = 0;
    for (const auto& c : cohorts) (cohort_class(c) == 0 ? hc : rbd)++;
    if (hc < 2 || rbd < 2)
        throw ArgumentError("train_detector: need at least 2 subjects per class, got " +
                            std::to_string(hc) + " HC / " + std::to_string(rbd) + " RBD");

    const auto& names = variant_features(variant);
    std::vector<double> values;
    std::vector<std::uint32_t> labels;
    for (std::size_t i = 0; i < metrics.size(); ++i) {
        const auto row = metric_vector(metrics[i], variant);
        values.insert(values.end(), row.begin(), row.end());
        labels.push_back(cohort_class(cohorts[i]));
    }

    forest::TrainConfig cfg;
    cfg.n_trees = n_trees;
    cfg.m_try = variant_m_try(variant);
    cfg.seed = seed;
    cfg.jobs = jobs;
    auto result = forest::train({values.data(), labels.size(), names.size()}, labels,
                                kCohortClasses, cfg);
    result.forest.schema_hash = variant_schema_hash(variant);
    return std::move(result.forest);
}

struct Detection {
    std::string label;        // HC or RBD
    double probability = 0.0; // vote fraction of the predicted label
    std::vector<double> votes;
};

inline Detection detect(const forest::TrainedForest& f, const rswa::SubjectMetrics& m) {
    const Variant variant =
        f.schema_hash == variant_schema_hash(Variant::Established) ? Variant::Established
                                                                   : Variant::Additional;
    if (f.schema_hash != variant_schema_hash(variant))
        throw SchemaError("detector model has an unknown feature schema");
    const auto x = metric_vector(m, variant);
    const auto p = f.predict(x);
    Detection d;
    d.label = f.classes[p.label];
    d.probability = p.votes[p.label];
    d.votes = p.votes;
    return d;
}

// Single-metric threshold rule for the comparison table: orientation and
// cut chosen on training data by accuracy, deterministic tie-breaking
// (lowest threshold, RBD-below orientation first).
struct ThresholdClassifier {
    std::string metric;
    double threshold = 0.0;
    bool rbd_below = true;  // true: value <= threshold -> RBD

    std::string predict(double value) const {
        const bool is_rbd = rbd_below ? value <= threshold : value > threshold;
        return is_rbd ? "RBD" : "HC";
    }
};

inline ThresholdClassifier fit_threshold(const std::string& metric,
                                         const std::vector<double>& values,
                                         const std::vector<std::uint32_t>& labels) {
    if (values.size() != labels.size() || values.empty())
        throw ArgumentError("fit_threshold: bad inputs");
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    std::vector<double> cuts;
    cuts.push_back(sorted.front() - 1.0);
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
        cuts.push_back(0.5 * (sorted[i] + sorted[i + 1]));
    cuts.push_back(sorted.back() + 1.0);

    ThresholdClassifier best{metric, cuts.front(), true};
    double best_acc = -1.0;
    for (bool rbd_below : {true, false}) {
        for (double cut : cuts) {
            std::size_t ok = 0;
            for (std::size_t i = 0; i < values.size(); ++i) {
                const bool is_rbd = rbd_below ? values[i] <= cut : values[i] > cut;
                if (is_rbd == (labels[i] == 1)) ++ok;
            }
            const double acc = double(ok) / double(values.size());
            if (acc > best_acc + 1e-12) {
                best_acc = acc;
                best = {metric, cut, rbd_below};
            }
        }
    }
    return best;
}

}  // namespace rbd::detect
