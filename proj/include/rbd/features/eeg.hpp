#pragma once

// EEG feature primitives: zero crossings, Hjorth parameters, derivative
// statistics, percentile spread, coastline, band spectra and band-limited
// energy operators. All primitives work on one mini-epoch; the extractor
// reduces the three mini-epochs of an epoch to the mean unless a feature
// explicitly keeps min/max.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "rbd/dsp/band_isolate.hpp"
#include "rbd/dsp/bands.hpp"
#include "rbd/dsp/stft.hpp"
#include "rbd/dsp/welch.hpp"
#include "rbd/util/stats.hpp"

namespace rbd::features {

struct Hjorth {
    double activity = 0.0;
    double mobility = 0.0;
    double complexity = 0.0;
};

inline std::vector<double> forward_diff(std::span<const double> x) {
    if (x.size() < 2) return {};
    std::vector<double> d(x.size() - 1);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) d[i] = x[i + 1] - x[i];
    return d;
}

// Hjorth activity/mobility/complexity; constant input maps to zeros rather
// than NaN.
inline bool is_constant(std::span<const double> x) {
    for (std::size_t i = 1; i < x.size(); ++i)
        if (x[i] != x[0]) return false;
    return true;
}

inline Hjorth hjorth(std::span<const double> x) {
    Hjorth h;
    if (x.size() < 3 || is_constant(x)) return h;
    h.activity = stats::variance(x);
    if (h.activity <= 0.0) return h;
    const auto d1 = forward_diff(x);
    const double var_d1 = stats::variance(d1);
    h.mobility = std::sqrt(var_d1 / h.activity);
    if (var_d1 <= 0.0) return h;
    const auto d2 = forward_diff(d1);
    const double var_d2 = stats::variance(d2);
    const double mobility_d1 = std::sqrt(var_d2 / var_d1);
    h.complexity = h.mobility > 0.0 ? mobility_d1 / h.mobility : 0.0;
    return h;
}

// Crossings of the mini-epoch mean, per second.
inline double zero_crossing_rate(std::span<const double> x, double rate) {
    if (x.size() < 2 || rate <= 0.0 || is_constant(x)) return 0.0;
    const double m = stats::mean(x);
    std::size_t crossings = 0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double a = x[i] - m, b = x[i + 1] - m;
        if ((a < 0.0 && b >= 0.0) || (a >= 0.0 && b < 0.0)) ++crossings;
    }
    return double(crossings) * rate / double(x.size());
}

// log(1 + mean|d_k|) and the fraction of |d_k| strictly below its own
// median, for forward differences k = 1..max_order.
inline std::vector<double> derivative_features(std::span<const double> x, int max_order = 10) {
    std::vector<double> out;
    out.reserve(2 * static_cast<std::size_t>(max_order));
    std::vector<double> d(x.begin(), x.end());
    for (int k = 1; k <= max_order; ++k) {
        d = forward_diff(d);
        std::vector<double> mag(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) mag[i] = std::fabs(d[i]);
        const double mean_mag = stats::mean(mag);
        const double med = stats::median(mag);
        std::size_t below = 0;
        for (double v : mag)
            if (v < med) ++below;
        out.push_back(std::log1p(mean_mag));
        out.push_back(mag.empty() ? 0.0 : double(below) / double(mag.size()));
    }
    return out;
}

inline double interquartile_range(std::span<const double> x) {
    return stats::percentile(x, 75.0) - stats::percentile(x, 25.0);
}

// Sum of absolute first differences.
inline double coastline(std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) s += std::fabs(x[i + 1] - x[i]);
    return s;
}

struct EnergyOperatorStats {
    double mean = 0.0;
    double sd = 0.0;
};

// Teager-Kaiser energy psi[n] = x[n]^2 - x[n-1] x[n+1].
inline EnergyOperatorStats tkeo_stats(std::span<const double> x) {
    if (x.size() < 3) return {};
    std::vector<double> psi(x.size() - 2);
    for (std::size_t i = 1; i + 1 < x.size(); ++i) psi[i - 1] = x[i] * x[i] - x[i - 1] * x[i + 1];
    return {stats::mean(psi), stats::stddev(psi)};
}

inline EnergyOperatorStats seo_stats(std::span<const double> x) {
    if (x.empty()) return {};
    std::vector<double> sq(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) sq[i] = x[i] * x[i];
    return {stats::mean(sq), stats::stddev(sq)};
}

// Relative spectral power of the five clinical bands (fractions of their
// sum) and the 95% spectral edge frequency; zero-power input maps to zeros.
struct BandPowers {
    std::array<double, 5> rsp{};  // delta, theta, alpha, beta, gamma
    double sef95 = 0.0;
};

inline BandPowers band_powers(const dsp::Psd& psd) {
    BandPowers out;
    double total = 0.0;
    for (std::size_t b = 0; b < dsp::kEegBands.size(); ++b) {
        out.rsp[b] = psd.band_power(dsp::kEegBands[b].lo_hz, dsp::kEegBands[b].hi_hz);
        total += out.rsp[b];
    }
    if (total > 0.0)
        for (double& v : out.rsp) v /= total;
    else
        out.rsp.fill(0.0);
    out.sef95 = psd.edge_frequency(0.95);
    return out;
}

}  // namespace rbd::features
