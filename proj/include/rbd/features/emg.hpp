#pragma once

// EMG feature primitives, computed on a whole 30-s epoch: atonia-index
// ingredient, rectified energy, 75th percentile, histogram entropy,
// within-epoch motor-activity duration, fractal exponent and band powers.
// The full-night metrics (with cross-epoch baselines) live in rswa.hpp;
// these per-epoch variants use epoch-local baselines only.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "rbd/dsp/welch.hpp"
#include "rbd/util/stats.hpp"

namespace rbd::features {

// Mean rectified amplitude over non-overlapping windows (1 s by default).
inline std::vector<double> rectified_window_means(std::span<const double> x, std::size_t window) {
    std::vector<double> out;
    if (window == 0) return out;
    out.reserve(x.size() / window);
    for (std::size_t start = 0; start + window <= x.size(); start += window) {
        double s = 0.0;
        for (std::size_t i = start; i < start + window; ++i) s += std::fabs(x[i]);
        out.push_back(s / double(window));
    }
    return out;
}

// Fraction of corrected 1-s rectified means <= 1 uV, with the 1-2 uV bin
// excluded from the denominator. `corrected` subtracts the minimum window
// mean of the span (callers choose the span: epoch-local here, a moving
// 60-s span for the full-night metric).
inline double atonia_fraction(std::span<const double> window_means_corrected) {
    std::size_t low = 0, mid = 0;
    for (double v : window_means_corrected) {
        if (v <= 1.0) ++low;
        else if (v < 2.0) ++mid;
    }
    const std::size_t denom = window_means_corrected.size() - mid;
    return denom == 0 ? 0.0 : double(low) / double(denom);
}

// Epoch-local corrected atonia ingredient: corrects each 1-s window by the
// minimum window mean within the epoch.
inline double epoch_atonia_fraction(std::span<const double> x, double rate) {
    auto means = rectified_window_means(x, static_cast<std::size_t>(rate));
    if (means.empty()) return 0.0;
    const double floor = *std::min_element(means.begin(), means.end());
    for (double& v : means) v -= floor;
    return atonia_fraction(means);
}

inline double mean_rectified_amplitude(std::span<const double> x) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += std::fabs(v);
    return s / double(x.size());
}

inline double rectified_p75(std::span<const double> x) {
    std::vector<double> mag(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) mag[i] = std::fabs(x[i]);
    return stats::percentile(mag, 75.0);
}

// Shannon entropy (bits) of a 256-bin amplitude histogram; constant input
// occupies a single bin and scores 0.
inline double histogram_entropy(std::span<const double> x, int bins = 256) {
    if (x.empty()) return 0.0;
    const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
    const double lo = *lo_it, hi = *hi_it;
    if (hi <= lo) return 0.0;
    std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
    for (double v : x) {
        auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * bins);
        if (b >= counts.size()) b = counts.size() - 1;
        ++counts[b];
    }
    double h = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = double(c) / double(x.size());
        h -= p * std::log2(p);
    }
    return h;
}

struct MotorEventParams {
    double threshold_factor = 2.0;   // amplitude > factor * baseline
    double min_duration_s = 0.3;     // shorter excursions are discarded
    double merge_gap_s = 0.5;        // events closer than this are merged
    double smooth_s = 0.05;          // rectified moving-average smoothing
};

struct EventSpan {
    std::size_t begin = 0;  // sample indices, [begin, end)
    std::size_t end = 0;
};

// Threshold-crossing events of a rectified-smoothed trace against a
// per-sample baseline: sustained >= min_duration, merged across short gaps.
inline std::vector<EventSpan> detect_events(std::span<const double> rectified_smooth,
                                            std::span<const double> baseline, double rate,
                                            const MotorEventParams& params) {
    const auto min_len = static_cast<std::size_t>(params.min_duration_s * rate + 0.5);
    const auto max_gap = static_cast<std::size_t>(params.merge_gap_s * rate + 0.5);
    std::vector<EventSpan> events;
    std::size_t i = 0;
    const std::size_t n = rectified_smooth.size();
    while (i < n) {
        if (rectified_smooth[i] > params.threshold_factor * baseline[i]) {
            std::size_t j = i + 1;
            while (j < n && rectified_smooth[j] > params.threshold_factor * baseline[j]) ++j;
            events.push_back({i, j});
            i = j;
        } else {
            ++i;
        }
    }
    // sustained-duration filter first, then gap merging
    std::vector<EventSpan> kept;
    for (const auto& e : events)
        if (e.end - e.begin >= min_len) kept.push_back(e);
    std::vector<EventSpan> merged;
    for (const auto& e : kept) {
        if (!merged.empty() && e.begin - merged.back().end < max_gap)
            merged.back().end = e.end;
        else
            merged.push_back(e);
    }
    return merged;
}

inline std::vector<double> rectified_smooth(std::span<const double> x, double rate,
                                            double smooth_s) {
    const auto half = static_cast<std::size_t>(smooth_s * rate / 2.0 + 0.5);
    std::vector<double> out(x.size(), 0.0);
    // prefix sums of |x| for O(n) moving average
    std::vector<double> prefix(x.size() + 1, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) prefix[i + 1] = prefix[i] + std::fabs(x[i]);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::size_t lo = i > half ? i - half : 0;
        const std::size_t hi = std::min(x.size(), i + half + 1);
        out[i] = (prefix[hi] - prefix[lo]) / double(hi - lo);
    }
    return out;
}

// Seconds of motor activity within one epoch, baseline = 5th percentile of
// the epoch's own rectified-smoothed trace.
inline double epoch_motor_activity_seconds(std::span<const double> x, double rate,
                                           const MotorEventParams& params = {}) {
    if (x.empty() || rate <= 0.0) return 0.0;
    const auto smooth = rectified_smooth(x, rate, params.smooth_s);
    const double base = std::max(stats::percentile(smooth, 5.0), 1e-12);
    const std::vector<double> baseline(x.size(), base);
    const auto events = detect_events(smooth, baseline, rate, params);
    std::size_t covered = 0;
    for (const auto& e : events) covered += e.end - e.begin;
    return double(covered) / rate;
}

struct EmgSpectral {
    double fractal_exponent = 0.0;  // alpha in P(f) ~ f^-alpha over 10-80 Hz
    double gamma_power = 0.0;       // integrated power 30-100 Hz
    double relative_power = 0.0;    // (12.5-21 Hz) / (8-32 Hz)
    double sef95 = 0.0;
};

inline EmgSpectral emg_spectral(const dsp::Psd& psd) {
    EmgSpectral out;
    static const std::vector<double> notches = {50.0, 60.0};
    out.fractal_exponent = -dsp::spectral_slope(psd, 10.0, 80.0, notches, 2.0);
    out.gamma_power = psd.band_power(30.0, 100.0);
    const double total_band = psd.band_power(8.0, 32.0);
    out.relative_power = total_band > 0.0 ? psd.band_power(12.5, 21.0) / total_band : 0.0;
    out.sef95 = psd.edge_frequency(0.95);
    return out;
}

}  // namespace rbd::features
