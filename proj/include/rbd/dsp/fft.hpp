#pragma once

// Self-contained FFT: iterative radix-2 for power-of-two sizes, Bluestein's
// chirp-z for everything else. Plans (twiddles, chirp spectra) are cached per
// size behind a mutex and shared read-only, so concurrent transforms are safe
// and bit-identical to serial runs.

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "rbd/errors.hpp"

namespace rbd::dsp {

using cplx = std::complex<double>;

namespace detail {

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

struct Pow2Plan {
    std::size_t n;
    std::vector<cplx> twiddle;        // e^{-2πi k/n}, k < n/2
    std::vector<std::uint32_t> perm;  // bit-reversal permutation

    explicit Pow2Plan(std::size_t size) : n(size) {
        twiddle.resize(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k) {
            const double phi = -2.0 * M_PI * double(k) / double(n);
            twiddle[k] = cplx(std::cos(phi), std::sin(phi));
        }
        perm.resize(n);
        std::uint32_t bits = 0;
        while ((std::size_t(1) << bits) < n) ++bits;
        for (std::size_t i = 0; i < n; ++i) {
            std::uint32_t r = 0;
            for (std::uint32_t b = 0; b < bits; ++b)
                if (i & (std::size_t(1) << b)) r |= std::uint32_t(1) << (bits - 1 - b);
            perm[i] = r;
        }
    }

    void run(cplx* a, bool inverse) const {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = perm[i];
            if (i < j) std::swap(a[i], a[j]);
        }
        for (std::size_t len = 2; len <= n; len <<= 1) {
            const std::size_t half = len >> 1;
            const std::size_t step = n / len;
            for (std::size_t base = 0; base < n; base += len) {
                for (std::size_t k = 0; k < half; ++k) {
                    cplx w = twiddle[k * step];
                    if (inverse) w = std::conj(w);
                    const cplx u = a[base + k];
                    const cplx v = a[base + k + half] * w;
                    a[base + k] = u + v;
                    a[base + k + half] = u - v;
                }
            }
        }
        if (inverse) {
            const double inv = 1.0 / double(n);
            for (std::size_t i = 0; i < n; ++i) a[i] *= inv;
        }
    }
};

struct BluesteinPlan {
    std::size_t n;       // requested size
    std::size_t m;       // power-of-two convolution size >= 2n-1
    std::vector<cplx> chirp;      // e^{-iπ k²/n}
    std::vector<cplx> b_spectrum; // FFT of the chirp kernel
    std::shared_ptr<const Pow2Plan> pow2;

    BluesteinPlan(std::size_t size, std::shared_ptr<const Pow2Plan> p2)
        : n(size), m(p2->n), pow2(std::move(p2)) {
        chirp.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            // k² mod 2n keeps the phase argument small for long inputs
            const auto k2 = static_cast<std::uint64_t>(k) * k % (2 * n);
            const double phi = -M_PI * double(k2) / double(n);
            chirp[k] = cplx(std::cos(phi), std::sin(phi));
        }
        std::vector<cplx> b(m, cplx(0.0, 0.0));
        b[0] = std::conj(chirp[0]);
        for (std::size_t k = 1; k < n; ++k) {
            b[k] = std::conj(chirp[k]);
            b[m - k] = std::conj(chirp[k]);
        }
        pow2->run(b.data(), false);
        b_spectrum = std::move(b);
    }

    void run(cplx* a, bool inverse) const {
        std::vector<cplx> work(m, cplx(0.0, 0.0));
        for (std::size_t k = 0; k < n; ++k)
            work[k] = a[k] * (inverse ? std::conj(chirp[k]) : chirp[k]);
        pow2->run(work.data(), false);
        for (std::size_t k = 0; k < m; ++k)
            work[k] *= inverse ? std::conj(b_spectrum[k]) : b_spectrum[k];
        pow2->run(work.data(), true);
        const double inv = inverse ? 1.0 / double(n) : 1.0;
        for (std::size_t k = 0; k < n; ++k)
            a[k] = work[k] * (inverse ? std::conj(chirp[k]) : chirp[k]) * inv;
    }
};

inline std::shared_ptr<const Pow2Plan> pow2_plan(std::size_t n) {
    static std::mutex mutex;
    static std::map<std::size_t, std::shared_ptr<const Pow2Plan>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_shared<Pow2Plan>(n);
    return slot;
}

inline std::shared_ptr<const BluesteinPlan> bluestein_plan(std::size_t n) {
    static std::mutex mutex;
    static std::map<std::size_t, std::shared_ptr<const BluesteinPlan>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_shared<BluesteinPlan>(n, pow2_plan(next_pow2(2 * n - 1)));
    return slot;
}

}  // namespace detail

// In-place DFT of arbitrary size; inverse includes the 1/n factor.
inline void fft(std::vector<cplx>& a, bool inverse = false) {
    const std::size_t n = a.size();
    if (n <= 1) return;
    if ((n & (n - 1)) == 0) {
        detail::pow2_plan(n)->run(a.data(), inverse);
    } else {
        detail::bluestein_plan(n)->run(a.data(), inverse);
    }
}

inline std::vector<cplx> fft_real(const std::vector<double>& x, std::size_t n = 0) {
    if (n == 0) n = x.size();
    std::vector<cplx> a(n, cplx(0.0, 0.0));
    const std::size_t take = std::min(n, x.size());
    for (std::size_t i = 0; i < take; ++i) a[i] = cplx(x[i], 0.0);
    fft(a);
    return a;
}

// Linear convolution via FFT (block-wise overlap-save for long inputs).
// Returns the full convolution of length nx + nh - 1.
inline std::vector<double> convolve(const std::vector<double>& x, const std::vector<double>& h) {
    const std::size_t nx = x.size(), nh = h.size();
    if (nx == 0 || nh == 0) return {};
    const std::size_t ny = nx + nh - 1;

    if (static_cast<double>(nx) * static_cast<double>(nh) < 65536.0) {
        std::vector<double> y(ny, 0.0);
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t j = 0; j < nh; ++j) y[i + j] += x[i] * h[j];
        return y;
    }

    const std::size_t fft_n = detail::next_pow2(std::max<std::size_t>(4 * nh, 16384));
    const std::size_t step = fft_n - (nh - 1);
    const auto plan = detail::pow2_plan(fft_n);

    std::vector<cplx> hf(fft_n, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < nh; ++i) hf[i] = cplx(h[i], 0.0);
    plan->run(hf.data(), false);

    std::vector<double> y(ny, 0.0);
    std::vector<cplx> block(fft_n);
    for (std::size_t start = 0; start < nx; start += step) {
        const std::size_t take = std::min(step, nx - start);
        for (std::size_t i = 0; i < fft_n; ++i)
            block[i] = (i < take) ? cplx(x[start + i], 0.0) : cplx(0.0, 0.0);
        plan->run(block.data(), false);
        for (std::size_t i = 0; i < fft_n; ++i) block[i] *= hf[i];
        plan->run(block.data(), true);
        const std::size_t limit = std::min(take + nh - 1, ny - start);
        for (std::size_t i = 0; i < limit; ++i) y[start + i] += block[i].real();
    }
    return y;
}

// Biased/unbiased autocorrelation of the demeaned signal, lags 0..max_lag.
inline std::vector<double> autocorrelation(const std::vector<double>& x, std::size_t max_lag,
                                           bool unbiased = true) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    max_lag = std::min(max_lag, n - 1);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= double(n);

    const std::size_t fft_n = detail::next_pow2(2 * n);
    std::vector<cplx> a(fft_n, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < n; ++i) a[i] = cplx(x[i] - mean, 0.0);
    fft(a);
    for (auto& v : a) v = cplx(std::norm(v), 0.0);
    fft(a, true);

    std::vector<double> r(max_lag + 1);
    for (std::size_t l = 0; l <= max_lag; ++l) {
        const double denom = unbiased ? double(n - l) : double(n);
        r[l] = a[l].real() / denom;
    }
    return r;
}

}  // namespace rbd::dsp
