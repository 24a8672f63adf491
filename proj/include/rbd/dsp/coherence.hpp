#pragma once

// Welch-averaged magnitude-squared coherence |Pxy|² / (Pxx·Pyy), in [0, 1].

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "rbd/dsp/fft.hpp"
#include "rbd/dsp/welch.hpp"
#include "rbd/errors.hpp"

namespace rbd::dsp {

struct Coherence {
    double df = 0.0;
    std::vector<double> freq;
    std::vector<double> value;  // magnitude-squared coherence per bin

    double band_mean(double lo_hz, double hi_hz) const {
        double s = 0.0;
        std::size_t n = 0;
        for (std::size_t k = 0; k < freq.size(); ++k) {
            if (freq[k] < lo_hz || freq[k] > hi_hz) continue;
            s += value[k];
            ++n;
        }
        return n == 0 ? 0.0 : s / double(n);
    }
};

inline Coherence coherence(std::span<const double> x, std::span<const double> y, double rate,
                           std::size_t window_len = 0) {
    if (x.size() != y.size()) throw ArgumentError("coherence: length mismatch");
    if (x.size() < 512) throw ArgumentError("coherence: need at least 512 samples");
    if (window_len == 0) {
        window_len = x.size() / 8;
        if (window_len % 2 == 1) --window_len;
    }
    if (window_len < 16) throw ArgumentError("coherence: window too short");

    const std::size_t hop = window_len / 2;
    const std::size_t n_segments = (x.size() - window_len) / hop + 1;
    const auto window = hann_window(window_len);
    const std::size_t n_bins = window_len / 2 + 1;

    std::vector<std::complex<double>> pxy(n_bins, {0.0, 0.0});
    std::vector<double> pxx(n_bins, 0.0), pyy(n_bins, 0.0);
    std::vector<cplx> bx(window_len), by(window_len);
    for (std::size_t s = 0; s < n_segments; ++s) {
        const auto sx = x.subspan(s * hop, window_len);
        const auto sy = y.subspan(s * hop, window_len);
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < window_len; ++i) {
            mx += sx[i];
            my += sy[i];
        }
        mx /= double(window_len);
        my /= double(window_len);
        for (std::size_t i = 0; i < window_len; ++i) {
            bx[i] = cplx((sx[i] - mx) * window[i], 0.0);
            by[i] = cplx((sy[i] - my) * window[i], 0.0);
        }
        fft(bx);
        fft(by);
        for (std::size_t k = 0; k < n_bins; ++k) {
            pxy[k] += bx[k] * std::conj(by[k]);
            pxx[k] += std::norm(bx[k]);
            pyy[k] += std::norm(by[k]);
        }
    }

    Coherence out;
    out.df = rate / double(window_len);
    out.freq.resize(n_bins);
    out.value.resize(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) {
        out.freq[k] = double(k) * out.df;
        const double denom = pxx[k] * pyy[k];
        out.value[k] = denom > 0.0 ? std::min(1.0, std::norm(pxy[k]) / denom) : 0.0;
    }
    return out;
}

}  // namespace rbd::dsp
