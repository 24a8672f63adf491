#pragma once

// Permuted delta prediction error: importance of feature j is the increase
// in misclassification rate after shuffling column j, averaged over R
// repetitions.

#include <cstdint>
#include <string>
#include <vector>

#include "rbd/errors.hpp"
#include "rbd/forest/forest.hpp"
#include "rbd/util/rng.hpp"

namespace rbd::forest {

inline double misclassification_rate(const TrainedForest& f, const DataView& x,
                                     const std::vector<std::uint32_t>& y) {
    if (x.n_rows == 0) throw ArgumentError("misclassification_rate: empty evaluation set");
    std::size_t wrong = 0;
    for (std::size_t r = 0; r < x.n_rows; ++r)
        if (f.predict(x.row(r)).label != y[r]) ++wrong;
    return double(wrong) / double(x.n_rows);
}

// Error after replacing column j with its values reordered by `perm`
// (perm[i] = source row of the value placed at row i). The identity
// permutation reproduces the baseline error exactly.
inline double column_permuted_error(const TrainedForest& f, const DataView& x,
                                    const std::vector<std::uint32_t>& y, std::size_t column,
                                    const std::vector<std::size_t>& perm) {
    if (perm.size() != x.n_rows) throw ArgumentError("column_permuted_error: bad permutation");
    std::vector<double> row(x.n_cols);
    std::size_t wrong = 0;
    for (std::size_t r = 0; r < x.n_rows; ++r) {
        const auto src = x.row(r);
        std::copy(src.begin(), src.end(), row.begin());
        row[column] = x.at(perm[r], column);
        if (f.predict(row).label != y[r]) ++wrong;
    }
    return double(wrong) / double(x.n_rows);
}

struct ImportanceReport {
    std::vector<double> delta_error;  // one per feature
    double base_error = 0.0;
};

inline ImportanceReport permutation_importance(const TrainedForest& f, const DataView& x,
                                               const std::vector<std::uint32_t>& y,
                                               std::uint64_t seed, std::size_t repetitions = 10,
                                               unsigned jobs = 1) {
    ImportanceReport report;
    report.base_error = misclassification_rate(f, x, y);
    report.delta_error.assign(x.n_cols, 0.0);

    parallel_for(x.n_cols, jobs, [&](std::size_t j) {
        double acc = 0.0;
        std::vector<std::size_t> perm(x.n_rows);
        for (std::size_t rep = 0; rep < repetitions; ++rep) {
            Rng rng = Rng::stream(seed, j * repetitions + rep);
            for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
            for (std::size_t i = perm.size(); i > 1; --i)
                std::swap(perm[i - 1], perm[rng.uniform_int(i)]);
            acc += column_permuted_error(f, x, y, j, perm) - report.base_error;
        }
        report.delta_error[j] = acc / double(repetitions);
    });
    return report;
}

}  // namespace rbd::forest
