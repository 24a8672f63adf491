#pragma once

// Rational-rate polyphase resampling with a Kaiser-windowed sinc kernel
// (64 taps per phase). The rational factor is recovered from the rate pair
// by continued fractions, so EDF-style rates (integer samples per record)
// map to exact ratios.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "rbd/errors.hpp"
#include "rbd/types.hpp"

namespace rbd {

namespace detail {

inline double bessel_i0(double x) {
    // power series; converges quickly for the beta range used here
    double sum = 1.0, term = 1.0;
    const double half_x = x / 2.0;
    for (int k = 1; k < 64; ++k) {
        term *= (half_x / k) * (half_x / k);
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return sum;
}

struct Ratio {
    std::int64_t up;    // L
    std::int64_t down;  // M
};

// Best rational approximation of `value` with bounded denominator.
inline Ratio approx_ratio(double value, std::int64_t max_den = 1 << 20) {
    std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double x = value;
    for (int i = 0; i < 64; ++i) {
        const auto a = static_cast<std::int64_t>(std::floor(x));
        const std::int64_t p2 = a * p1 + p0;
        const std::int64_t q2 = a * q1 + q0;
        if (q2 > max_den) break;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        const double frac = x - double(a);
        if (frac < 1e-12) break;
        x = 1.0 / frac;
    }
    const std::int64_t g = std::gcd(p1, q1 == 0 ? 1 : q1);
    return Ratio{p1 / g, (q1 == 0 ? 1 : q1) / g};
}

}  // namespace detail

inline constexpr int kResampleTapsPerPhase = 64;
inline constexpr double kResampleKaiserBeta = 10.0;

inline Signal resample(const Signal& in, double target_rate) {
    if (in.rate <= 0.0) throw ArgumentError("resample: source rate must be positive");
    if (target_rate <= 0.0) throw ArgumentError("resample: target rate must be positive");
    if (in.rate == target_rate) return in;

    const auto ratio = detail::approx_ratio(target_rate / in.rate);
    const std::int64_t up = ratio.up, down = ratio.down;
    if (up <= 0 || down <= 0) throw ArgumentError("resample: cannot express rate ratio rationally");

    const std::int64_t n_in = static_cast<std::int64_t>(in.samples.size());
    const auto n_out = static_cast<std::int64_t>(std::llround(double(n_in) * double(up) / double(down)));

    // Anti-alias/anti-image lowpass at min(in, out) Nyquist, in the upsampled
    // domain where the rate is in.rate * up.
    const double cutoff = 0.5 * std::min(in.rate, target_rate) / (in.rate * double(up));
    const std::int64_t taps = kResampleTapsPerPhase * up;
    const std::int64_t center = taps / 2;

    std::vector<double> kernel(static_cast<std::size_t>(taps));
    const double i0_beta = detail::bessel_i0(kResampleKaiserBeta);
    for (std::int64_t i = 0; i < taps; ++i) {
        const double t = double(i - center);
        const double x = 2.0 * cutoff * t;
        const double sinc = (x == 0.0) ? 1.0 : std::sin(M_PI * x) / (M_PI * x);
        const double frac = double(i) / double(taps - 1) * 2.0 - 1.0;
        const double win = detail::bessel_i0(kResampleKaiserBeta * std::sqrt(std::max(0.0, 1.0 - frac * frac))) / i0_beta;
        kernel[static_cast<std::size_t>(i)] = 2.0 * cutoff * sinc * win;
    }
    // unit DC gain per polyphase branch (removes the truncation gain bias)
    for (std::int64_t p = 0; p < up; ++p) {
        double sum = 0.0;
        for (std::int64_t i = p; i < taps; i += up) sum += kernel[static_cast<std::size_t>(i)];
        if (sum != 0.0)
            for (std::int64_t i = p; i < taps; i += up) kernel[static_cast<std::size_t>(i)] /= sum;
    }

    Signal out;
    out.rate = target_rate;
    out.samples.resize(static_cast<std::size_t>(std::max<std::int64_t>(n_out, 0)), 0.0);
    for (std::int64_t j = 0; j < n_out; ++j) {
        // upsampled-domain position of output sample j
        const std::int64_t t = j * down;
        double acc = 0.0;
        // kernel index i must satisfy (t + center - i) % up == 0
        const std::int64_t first = (t + center) % up;
        for (std::int64_t i = first; i < taps; i += up) {
            const std::int64_t src = (t + center - i) / up;
            if (src < 0 || src >= n_in) continue;
            acc += kernel[static_cast<std::size_t>(i)] * in.samples[static_cast<std::size_t>(src)];
        }
        out.samples[static_cast<std::size_t>(j)] = acc;
    }
    return out;
}

// Resamples all three montage channels to a common rate and trims them to a
// shared length.
inline MontageTriplet resample_triplet(const MontageTriplet& t, double target_rate) {
    MontageTriplet out;
    out.eeg = resample(t.eeg, target_rate);
    out.eog = resample(t.eog, target_rate);
    out.emg = resample(t.emg, target_rate);
    out.source_labels = t.source_labels;
    const std::size_t n = std::min({out.eeg.samples.size(), out.eog.samples.size(),
                                    out.emg.samples.size()});
    out.eeg.samples.resize(n);
    out.eog.samples.resize(n);
    out.emg.samples.resize(n);
    return out;
}

}  // namespace rbd
