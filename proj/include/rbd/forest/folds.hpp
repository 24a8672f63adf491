#pragma once

// Subject-level k-fold plans, stratified by cohort: every subject lands in
// exactly one fold and per-fold cohort counts differ by at most one.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rbd/errors.hpp"
#include "rbd/util/rng.hpp"

namespace rbd::forest {

struct FoldPlan {
    int k = 10;
    std::map<std::string, int> assignment;          // subject -> fold
    std::map<std::string, std::string> strata;      // subject -> cohort

    std::vector<std::string> test_subjects(int fold) const {
        std::vector<std::string> out;
        for (const auto& [subject, f] : assignment)
            if (f == fold) out.push_back(subject);
        return out;
    }
};

inline FoldPlan make_folds(const std::vector<std::string>& subjects,
                           const std::vector<std::string>& cohorts, int k, std::uint64_t seed) {
    if (k < 2) throw ArgumentError("make_folds: k must be >= 2");
    if (subjects.size() != cohorts.size()) throw ArgumentError("make_folds: size mismatch");
    if (subjects.size() < static_cast<std::size_t>(k))
        throw ArgumentError("make_folds: fewer subjects (" + std::to_string(subjects.size()) +
                            ") than folds (" + std::to_string(k) + ")");

    FoldPlan plan;
    plan.k = k;

    // group by cohort in first-appearance order (deterministic)
    std::vector<std::string> cohort_order;
    std::map<std::string, std::vector<std::string>> groups;
    for (std::size_t i = 0; i < subjects.size(); ++i) {
        if (plan.strata.count(subjects[i]))
            throw ArgumentError("make_folds: duplicate subject " + subjects[i]);
        plan.strata[subjects[i]] = cohorts[i];
        if (!groups.count(cohorts[i])) cohort_order.push_back(cohorts[i]);
        groups[cohorts[i]].push_back(subjects[i]);
    }

    // deal round-robin, carrying the offset across cohorts so small cohorts
    // do not all pile onto fold 0
    std::size_t offset = 0;
    for (std::size_t g = 0; g < cohort_order.size(); ++g) {
        auto& members = groups[cohort_order[g]];
        Rng rng = Rng::stream(seed, g);
        rng.shuffle(members);
        for (std::size_t i = 0; i < members.size(); ++i)
            plan.assignment[members[i]] =
                static_cast<int>((offset + i) % static_cast<std::size_t>(k));
        offset += members.size();
    }
    return plan;
}

}  // namespace rbd::forest
