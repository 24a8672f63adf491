#pragma once

// Short-time Fourier transform with a fixed-width Hann window. Used for the
// per-band magnitude features; exposes per-frame band-magnitude averages.

#include <cmath>
#include <span>
#include <vector>

#include "rbd/dsp/fft.hpp"
#include "rbd/dsp/welch.hpp"
#include "rbd/errors.hpp"

namespace rbd::dsp {

struct Stft {
    double df = 0.0;
    double hop_s = 0.0;
    std::vector<double> freq;                    // n_bins
    std::vector<std::vector<double>> magnitude;  // [frame][bin]

    std::size_t n_frames() const { return magnitude.size(); }

    // Mean magnitude over bins in [lo_hz, hi_hz] for one frame.
    double band_magnitude(std::size_t frame, double lo_hz, double hi_hz) const {
        double s = 0.0;
        std::size_t n = 0;
        for (std::size_t k = 0; k < freq.size(); ++k) {
            if (freq[k] < lo_hz || freq[k] > hi_hz) continue;
            s += magnitude[frame][k];
            ++n;
        }
        return n == 0 ? 0.0 : s / double(n);
    }

    // Band magnitude averaged across all frames.
    double mean_band_magnitude(double lo_hz, double hi_hz) const {
        if (magnitude.empty()) return 0.0;
        double s = 0.0;
        for (std::size_t f = 0; f < magnitude.size(); ++f) s += band_magnitude(f, lo_hz, hi_hz);
        return s / double(magnitude.size());
    }
};

inline Stft stft(std::span<const double> x, double rate, std::size_t window_len,
                 std::size_t hop) {
    if (rate <= 0.0) throw ArgumentError("stft: rate must be positive");
    if (window_len < 8) throw ArgumentError("stft: window too short");
    if (hop == 0) throw ArgumentError("stft: hop must be positive");
    if (x.size() < window_len) throw ArgumentError("stft: signal shorter than one window");

    const auto window = hann_window(window_len);
    const std::size_t n_frames = (x.size() - window_len) / hop + 1;
    const std::size_t n_bins = window_len / 2 + 1;

    Stft out;
    out.df = rate / double(window_len);
    out.hop_s = double(hop) / rate;
    out.freq.resize(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) out.freq[k] = double(k) * out.df;
    out.magnitude.assign(n_frames, std::vector<double>(n_bins, 0.0));

    std::vector<cplx> buf(window_len);
    for (std::size_t f = 0; f < n_frames; ++f) {
        const auto seg = x.subspan(f * hop, window_len);
        for (std::size_t i = 0; i < window_len; ++i) buf[i] = cplx(seg[i] * window[i], 0.0);
        fft(buf);
        for (std::size_t k = 0; k < n_bins; ++k) out.magnitude[f][k] = std::abs(buf[k]);
    }
    return out;
}

}  // namespace rbd::dsp
