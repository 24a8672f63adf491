#pragma once

// Welch PSD estimate: Hann windows, 50% overlap, per-segment demeaning,
// one-sided density normalized so that sum(psd) * df ~= signal variance.

#include <cmath>
#include <span>
#include <vector>

#include "rbd/dsp/fft.hpp"
#include "rbd/errors.hpp"

namespace rbd::dsp {

struct Psd {
    double df = 0.0;                 // Hz per bin
    std::vector<double> freq;        // bin centers, Hz
    std::vector<double> power;       // density, units²/Hz

    double total_power() const {
        double s = 0.0;
        for (double p : power) s += p;
        return s * df;
    }

    // Integrated power in [lo_hz, hi_hz].
    double band_power(double lo_hz, double hi_hz) const {
        double s = 0.0;
        for (std::size_t i = 0; i < freq.size(); ++i)
            if (freq[i] >= lo_hz && freq[i] <= hi_hz) s += power[i];
        return s * df;
    }

    // Frequency below which `fraction` of the total power lies (spectral
    // edge frequency); 0 for an all-zero spectrum.
    double edge_frequency(double fraction = 0.95) const {
        const double total = total_power();
        if (total <= 0.0) return 0.0;
        double acc = 0.0;
        for (std::size_t i = 0; i < freq.size(); ++i) {
            acc += power[i] * df;
            if (acc >= fraction * total) return freq[i];
        }
        return freq.empty() ? 0.0 : freq.back();
    }
};

inline std::vector<double> hann_window(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * double(i) / double(n - 1));
    return w;
}

inline Psd welch_psd(std::span<const double> x, double rate, std::size_t window_len) {
    if (rate <= 0.0) throw ArgumentError("welch: rate must be positive");
    if (window_len < 8) throw ArgumentError("welch: window too short");
    if (x.size() < window_len) throw ArgumentError("welch: signal shorter than one window");

    const std::size_t hop = window_len / 2;
    const std::size_t n_segments = (x.size() - window_len) / hop + 1;
    const auto window = hann_window(window_len);
    double window_power = 0.0;
    for (double w : window) window_power += w * w;

    const std::size_t n_bins = window_len / 2 + 1;
    Psd out;
    out.df = rate / double(window_len);
    out.freq.resize(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) out.freq[k] = double(k) * out.df;
    out.power.assign(n_bins, 0.0);

    std::vector<cplx> buf(window_len);
    for (std::size_t s = 0; s < n_segments; ++s) {
        const auto seg = x.subspan(s * hop, window_len);
        double mean = 0.0;
        for (double v : seg) mean += v;
        mean /= double(window_len);
        for (std::size_t i = 0; i < window_len; ++i)
            buf[i] = cplx((seg[i] - mean) * window[i], 0.0);
        fft(buf);
        for (std::size_t k = 0; k < n_bins; ++k) {
            const double scale = (k == 0 || (window_len % 2 == 0 && k == n_bins - 1)) ? 1.0 : 2.0;
            out.power[k] += scale * std::norm(buf[k]) / (rate * window_power);
        }
    }
    for (double& p : out.power) p /= double(n_segments);
    return out;
}

// Convenience with the spec'd minimum-length guard for the generic psd op.
inline Psd psd(std::span<const double> x, double rate, std::size_t window_len = 0) {
    if (x.size() < 256) throw ArgumentError("psd: need at least 256 samples");
    if (window_len == 0) window_len = std::min<std::size_t>(x.size(), static_cast<std::size_t>(2.0 * rate));
    return welch_psd(x, rate, window_len);
}

// Least-squares slope of log10(power) vs log10(freq) over [lo_hz, hi_hz],
// skipping bins inside the notch exclusion zones. The fractal exponent is
// the negative of this slope: P(f) ~ f^-alpha.
inline double spectral_slope(const Psd& p, double lo_hz, double hi_hz,
                             std::span<const double> exclude_centers = {},
                             double exclude_half_width = 2.0) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < p.freq.size(); ++i) {
        const double f = p.freq[i];
        if (f < lo_hz || f > hi_hz || p.power[i] <= 0.0) continue;
        bool excluded = false;
        for (double c : exclude_centers)
            if (std::fabs(f - c) <= exclude_half_width) excluded = true;
        if (excluded) continue;
        const double lx = std::log10(f);
        const double ly = std::log10(p.power[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++n;
    }
    if (n < 3) return 0.0;
    const double denom = double(n) * sxx - sx * sx;
    if (denom == 0.0) return 0.0;
    return (double(n) * sxy - sx * sy) / denom;
}

}  // namespace rbd::dsp
