#pragma once

// EOG feature primitives: autocorrelation peak, amplitude peaks,
// differentials, 0-4 Hz power ratio, level-4 detail DWT amplitude and
// permutation entropy.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "rbd/dsp/fft.hpp"
#include "rbd/dsp/wavelet.hpp"
#include "rbd/dsp/welch.hpp"
#include "rbd/util/stats.hpp"

namespace rbd::features {

// Largest non-zero-lag normalized autocorrelation (unbiased estimate,
// searched up to half the mini-epoch).
inline double autocorrelation_peak(const std::vector<double>& x) {
    if (x.size() < 4) return 0.0;
    const auto r = dsp::autocorrelation(x, x.size() / 2, /*unbiased=*/true);
    if (r.empty() || r[0] <= 0.0) return 0.0;
    double best = -1e300;
    for (std::size_t l = 1; l < r.size(); ++l) best = std::max(best, r[l] / r[0]);
    return best;
}

struct PeakPair {
    double max_peak = 0.0;         // signed value of the largest |x|
    double second_max_peak = 0.0;  // signed, outside a guard around the first
};

inline PeakPair absolute_peaks(std::span<const double> x, std::size_t guard_samples) {
    PeakPair out;
    if (x.empty()) return out;
    std::size_t arg = 0;
    for (std::size_t i = 1; i < x.size(); ++i)
        if (std::fabs(x[i]) > std::fabs(x[arg])) arg = i;
    out.max_peak = x[arg];
    double best = 0.0;
    bool found = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::size_t dist = i > arg ? i - arg : arg - i;
        if (dist <= guard_samples) continue;
        if (!found || std::fabs(x[i]) > std::fabs(best)) {
            best = x[i];
            found = true;
        }
    }
    out.second_max_peak = found ? best : 0.0;
    return out;
}

// Mean absolute first difference.
inline double mean_abs_differential(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) s += std::fabs(x[i + 1] - x[i]);
    return s / double(x.size() - 1);
}

// Power in [0, 4] Hz over total power; 0 for a silent segment.
inline double low_band_power_ratio(const dsp::Psd& psd) {
    const double total = psd.total_power();
    if (total <= 0.0) return 0.0;
    return psd.band_power(0.0, 4.0) / total;
}

// Max |reconstruction from level-4 detail coefficients|.
inline double dwt_level4_amplitude(const std::vector<double>& x, dsp::Wavelet wavelet) {
    if (x.size() < 16) return 0.0;
    const auto coeffs = dsp::dwt(x, wavelet, 4);
    const auto detail = dsp::reconstruct_detail(coeffs, 4);
    double peak = 0.0;
    for (double v : detail) peak = std::max(peak, std::fabs(v));
    return peak;
}

// Permutation entropy of ordinal patterns of `order` consecutive samples
// (unit delay) on a `decimate`-strided copy, normalized by log(order!) to
// [0, 1]. Monotone input has a single pattern and entropy 0.
inline double permutation_entropy(std::span<const double> x, int order = 10, int decimate = 4) {
    if (order < 2 || order > 16) throw ArgumentError("permutation entropy: bad order");
    std::vector<double> d;
    d.reserve(x.size() / static_cast<std::size_t>(decimate) + 1);
    for (std::size_t i = 0; i < x.size(); i += static_cast<std::size_t>(decimate))
        d.push_back(x[i]);
    const auto m = static_cast<std::size_t>(order);
    if (d.size() < m + 1) return 0.0;

    const std::size_t n_windows = d.size() - m + 1;
    std::vector<std::uint64_t> codes;
    codes.reserve(n_windows);
    std::vector<std::size_t> idx(m);
    for (std::size_t w = 0; w < n_windows; ++w) {
        for (std::size_t j = 0; j < m; ++j) idx[j] = j;
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return d[w + a] < d[w + b]; });
        std::uint64_t code = 0;
        for (std::size_t j = 0; j < m; ++j) code = code * m + idx[j];
        codes.push_back(code);
    }
    std::sort(codes.begin(), codes.end());

    double h = 0.0;
    std::size_t run_start = 0;
    for (std::size_t i = 1; i <= codes.size(); ++i) {
        if (i == codes.size() || codes[i] != codes[run_start]) {
            const double p = double(i - run_start) / double(codes.size());
            h -= p * std::log(p);
            run_start = i;
        }
    }
    double log_factorial = 0.0;
    for (int k = 2; k <= order; ++k) log_factorial += std::log(double(k));
    return log_factorial > 0.0 ? std::min(1.0, h / log_factorial) : 0.0;
}

}  // namespace rbd::features
