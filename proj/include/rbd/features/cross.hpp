#pragma once

// EEG-EOG cross-channel features: Pearson correlation p-value (t-transform,
// n-2 dof) and magnitude-squared coherence per clinical band.

#include <array>
#include <span>

#include "rbd/dsp/bands.hpp"
#include "rbd/dsp/coherence.hpp"
#include "rbd/util/stats.hpp"

namespace rbd::features {

// p-value for the null of no linear relationship; a constant channel carries
// no evidence, so it maps to p = 1.
inline double correlation_pvalue(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 3) return 1.0;
    double mx = stats::mean(x), my = stats::mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return 1.0;
    const double r = sxy / std::sqrt(sxx * syy);
    return stats::pearson_pvalue(r, x.size());
}

inline std::array<double, 5> band_coherence(std::span<const double> x, std::span<const double> y,
                                            double rate) {
    const auto c = dsp::coherence(x, y, rate);
    std::array<double, 5> out{};
    for (std::size_t b = 0; b < dsp::kEegBands.size(); ++b)
        out[b] = c.band_mean(dsp::kEegBands[b].lo_hz, dsp::kEegBands[b].hi_hz);
    return out;
}

}  // namespace rbd::features
