#pragma once

// Periodized orthogonal DWT (Haar, DB2) with perfect reconstruction. Odd
// lengths are padded by repeating the last sample; per-level lengths are
// recorded so the inverse restores the exact input length.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "rbd/errors.hpp"

namespace rbd::dsp {

enum class Wavelet { Haar, Db2 };

inline Wavelet wavelet_from_name(const std::string& name) {
    if (name == "haar" || name == "Haar" || name == "HAAR") return Wavelet::Haar;
    if (name == "db2" || name == "DB2" || name == "Db2") return Wavelet::Db2;
    throw ArgumentError("unsupported wavelet '" + name + "' (use Haar or DB2)");
}

namespace detail {

inline const std::vector<double>& scaling_filter(Wavelet w) {
    static const std::vector<double> haar = {0.7071067811865476, 0.7071067811865476};
    static const std::vector<double> db2 = {0.48296291314453416, 0.8365163037378079,
                                            0.2241438680420134, -0.12940952255126037};
    return w == Wavelet::Haar ? haar : db2;
}

inline std::vector<double> wavelet_filter(const std::vector<double>& h) {
    // quadrature mirror: g[m] = (-1)^m h[L-1-m]
    std::vector<double> g(h.size());
    for (std::size_t m = 0; m < h.size(); ++m)
        g[m] = ((m % 2 == 0) ? 1.0 : -1.0) * h[h.size() - 1 - m];
    return g;
}

}  // namespace detail

struct DwtCoeffs {
    Wavelet wavelet = Wavelet::Haar;
    std::vector<std::vector<double>> details;  // details[l] for level l+1
    std::vector<double> approx;                // coarsest approximation
    std::vector<std::size_t> input_lengths;    // pre-pad length at each level

    std::size_t levels() const { return details.size(); }
};

inline DwtCoeffs dwt(const std::vector<double>& x, Wavelet wavelet, int levels = 4) {
    if (levels < 1) throw ArgumentError("dwt: levels must be >= 1");
    if (x.size() < (std::size_t(1) << levels))
        throw ArgumentError("dwt: signal of length " + std::to_string(x.size()) +
                            " too short for " + std::to_string(levels) + " levels");

    const auto& h = detail::scaling_filter(wavelet);
    const auto g = detail::wavelet_filter(h);

    DwtCoeffs out;
    out.wavelet = wavelet;
    std::vector<double> a = x;
    for (int level = 0; level < levels; ++level) {
        out.input_lengths.push_back(a.size());
        if (a.size() % 2 == 1) a.push_back(a.back());
        const std::size_t n = a.size();
        const std::size_t half = n / 2;
        std::vector<double> approx(half, 0.0), det(half, 0.0);
        for (std::size_t k = 0; k < half; ++k) {
            double sa = 0.0, sd = 0.0;
            for (std::size_t m = 0; m < h.size(); ++m) {
                const double v = a[(2 * k + m) % n];
                sa += h[m] * v;
                sd += g[m] * v;
            }
            approx[k] = sa;
            det[k] = sd;
        }
        out.details.push_back(std::move(det));
        a = std::move(approx);
    }
    out.approx = std::move(a);
    return out;
}

inline std::vector<double> idwt(const DwtCoeffs& c) {
    const auto& h = detail::scaling_filter(c.wavelet);
    const auto g = detail::wavelet_filter(h);

    std::vector<double> a = c.approx;
    for (std::size_t level = c.details.size(); level-- > 0;) {
        const auto& det = c.details[level];
        const std::size_t half = a.size();
        const std::size_t n = 2 * half;
        std::vector<double> up(n, 0.0);
        for (std::size_t k = 0; k < half; ++k) {
            for (std::size_t m = 0; m < h.size(); ++m) {
                const std::size_t idx = (2 * k + m) % n;
                up[idx] += h[m] * a[k] + g[m] * det[k];
            }
        }
        up.resize(c.input_lengths[level]);  // drop the odd-length pad
        a = std::move(up);
    }
    return a;
}

// Reconstruction using only the detail coefficients of `level` (1-based);
// everything else is zeroed. This is the "level -4 inverse DWT" style
// feature source.
inline std::vector<double> reconstruct_detail(const DwtCoeffs& c, std::size_t level) {
    if (level < 1 || level > c.levels()) throw ArgumentError("reconstruct_detail: bad level");
    DwtCoeffs only = c;
    for (auto& v : only.approx) v = 0.0;
    for (std::size_t l = 0; l < only.details.size(); ++l)
        if (l + 1 != level)
            for (auto& v : only.details[l]) v = 0.0;
    return idwt(only);
}

}  // namespace rbd::dsp
