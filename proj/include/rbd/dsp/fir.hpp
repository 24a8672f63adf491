#pragma once

// Windowed-sinc FIR design (Hamming) and zero-phase application. Filtering
// is forward-backward, implemented as one pass with the kernel's
// autocorrelation, which is exactly symmetric and therefore has zero group
// delay; boundaries use zero extension and the edge samples are kept.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "rbd/dsp/fft.hpp"
#include "rbd/errors.hpp"

namespace rbd::dsp {

enum class FilterKind { Lowpass, Highpass, Bandpass, Bandstop };

struct FilterSpec {
    FilterKind kind = FilterKind::Bandpass;
    int order = 500;            // even; taps = order + 1
    std::vector<double> edges;  // Hz, strictly increasing, < rate/2
    double rate = 200.0;        // Hz

    void validate() const {
        if (order < 2 || order % 2 != 0)
            throw ArgumentError("FIR order must be even and >= 2, got " + std::to_string(order));
        if (rate <= 0.0) throw ArgumentError("FIR sample rate must be positive");
        const std::size_t need =
            (kind == FilterKind::Lowpass || kind == FilterKind::Highpass) ? 1 : 2;
        if (edges.size() != need) throw ArgumentError("wrong number of band edges");
        double prev = 0.0;
        for (double e : edges) {
            if (e <= prev) throw ArgumentError("band edges must be strictly increasing and positive");
            if (e >= rate / 2.0)
                throw ArgumentError("band edge " + std::to_string(e) + " Hz is at or above Nyquist");
            prev = e;
        }
    }
};

namespace detail {

inline double sinc(double x) {
    if (x == 0.0) return 1.0;
    return std::sin(M_PI * x) / (M_PI * x);
}

// Unity-DC-gain windowed-sinc lowpass, fc in cycles/sample.
inline std::vector<double> lowpass_taps(int order, double fc) {
    const int n = order + 1;
    const int center = order / 2;
    std::vector<double> h(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double w = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / order);
        h[i] = 2.0 * fc * sinc(2.0 * fc * (i - center)) * w;
        sum += h[i];
    }
    for (double& v : h) v /= sum;
    return h;
}

}  // namespace detail

inline std::vector<double> design_fir(const FilterSpec& spec) {
    spec.validate();
    const auto norm = [&](double hz) { return hz / spec.rate; };
    switch (spec.kind) {
        case FilterKind::Lowpass:
            return detail::lowpass_taps(spec.order, norm(spec.edges[0]));
        case FilterKind::Highpass: {
            auto h = detail::lowpass_taps(spec.order, norm(spec.edges[0]));
            for (double& v : h) v = -v;
            h[spec.order / 2] += 1.0;
            return h;
        }
        case FilterKind::Bandpass: {
            auto lo = detail::lowpass_taps(spec.order, norm(spec.edges[0]));
            auto hi = detail::lowpass_taps(spec.order, norm(spec.edges[1]));
            for (std::size_t i = 0; i < hi.size(); ++i) hi[i] -= lo[i];
            return hi;
        }
        case FilterKind::Bandstop: {
            auto lo = detail::lowpass_taps(spec.order, norm(spec.edges[0]));
            auto hi = detail::lowpass_taps(spec.order, norm(spec.edges[1]));
            for (std::size_t i = 0; i < hi.size(); ++i) hi[i] = lo[i] - hi[i];
            hi[spec.order / 2] += 1.0;
            return hi;
        }
    }
    throw ArgumentError("unknown filter kind");
}

// A notch is a narrow bandstop around `center_hz`.
inline std::vector<double> design_notch(int order, double center_hz, double rate,
                                        double half_width_hz = 2.0) {
    FilterSpec spec;
    spec.kind = FilterKind::Bandstop;
    spec.order = order;
    spec.rate = rate;
    spec.edges = {center_hz - half_width_hz, center_hz + half_width_hz};
    return design_fir(spec);
}

// Complex response H(f) of a tap vector at `hz`.
inline std::complex<double> freq_response(const std::vector<double>& taps, double hz, double rate) {
    const double w = 2.0 * M_PI * hz / rate;
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t i = 0; i < taps.size(); ++i)
        acc += taps[i] * std::complex<double>(std::cos(w * double(i)), -std::sin(w * double(i)));
    return acc;
}

inline double magnitude_db(const std::vector<double>& taps, double hz, double rate) {
    const double mag = std::abs(freq_response(taps, hz, rate));
    return 20.0 * std::log10(std::max(mag, 1e-300));
}

// h convolved with its reverse: the single-pass equivalent of
// forward-backward filtering, |H(f)|² response, exactly zero phase.
inline std::vector<double> zero_phase_kernel(const std::vector<double>& h) {
    std::vector<double> rev(h.rbegin(), h.rend());
    return convolve(h, rev);
}

// Cascade several filters into one kernel.
inline std::vector<double> cascade(const std::vector<std::vector<double>>& kernels) {
    if (kernels.empty()) throw ArgumentError("empty filter cascade");
    std::vector<double> acc = kernels.front();
    for (std::size_t i = 1; i < kernels.size(); ++i) acc = convolve(acc, kernels[i]);
    return acc;
}

// Applies a symmetric zero-phase kernel (odd length), keeping input length.
inline std::vector<double> apply_zero_phase(const std::vector<double>& x,
                                            const std::vector<double>& zp_kernel) {
    if (zp_kernel.size() % 2 != 1) throw ArgumentError("zero-phase kernel must have odd length");
    if (x.empty()) return {};
    const std::size_t delay = zp_kernel.size() / 2;
    auto full = convolve(x, zp_kernel);
    return std::vector<double>(full.begin() + static_cast<std::ptrdiff_t>(delay),
                               full.begin() + static_cast<std::ptrdiff_t>(delay + x.size()));
}

// Designs, squares, and applies a filter in one go (forward-backward).
inline std::vector<double> filtfilt(const std::vector<double>& x, const FilterSpec& spec) {
    return apply_zero_phase(x, zero_phase_kernel(design_fir(spec)));
}

}  // namespace rbd::dsp
