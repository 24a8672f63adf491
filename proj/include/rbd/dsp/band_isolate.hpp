#pragma once

// Ideal (brick-wall) band isolation of a finite segment: forward FFT once,
// zero bins outside the band, inverse FFT. Zero delay and exact for
// in-band periodic content; used by the band-limited energy-operator
// features. Pairs of bands share one inverse transform by packing two
// conjugate-symmetric spectra into one complex signal.

#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "rbd/dsp/fft.hpp"
#include "rbd/errors.hpp"

namespace rbd::dsp {

class SpectrumIsolator {
  public:
    SpectrumIsolator(std::span<const double> x, double rate) : n_(x.size()), rate_(rate) {
        if (rate <= 0.0) throw ArgumentError("band isolation: rate must be positive");
        if (n_ < 2) throw ArgumentError("band isolation: segment too short");
        spectrum_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) spectrum_[i] = cplx(x[i], 0.0);
        fft(spectrum_);
    }

    std::vector<double> isolate(double lo_hz, double hi_hz) const {
        std::vector<cplx> masked(n_, cplx(0.0, 0.0));
        apply_mask(masked, lo_hz, hi_hz, 1.0);
        fft(masked, true);
        std::vector<double> out(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = masked[i].real();
        return out;
    }

    // Two bands for the price of one inverse transform.
    std::pair<std::vector<double>, std::vector<double>> isolate_pair(double lo1, double hi1,
                                                                     double lo2, double hi2) const {
        std::vector<cplx> packed(n_, cplx(0.0, 0.0));
        apply_mask(packed, lo1, hi1, 1.0);
        apply_mask_imag(packed, lo2, hi2);
        fft(packed, true);
        std::vector<double> a(n_), b(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            a[i] = packed[i].real();
            b[i] = packed[i].imag();
        }
        return {std::move(a), std::move(b)};
    }

  private:
    bool in_band(std::size_t k, double lo_hz, double hi_hz) const {
        const std::size_t kk = std::min(k, n_ - k);  // fold onto [0, n/2]
        const double f = double(kk) * rate_ / double(n_);
        return f >= lo_hz && f <= hi_hz;
    }

    void apply_mask(std::vector<cplx>& out, double lo, double hi, double scale) const {
        for (std::size_t k = 0; k < n_; ++k)
            if (in_band(k, lo, hi)) out[k] += spectrum_[k] * scale;
    }

    void apply_mask_imag(std::vector<cplx>& out, double lo, double hi) const {
        for (std::size_t k = 0; k < n_; ++k)
            if (in_band(k, lo, hi)) out[k] += spectrum_[k] * cplx(0.0, 1.0);
    }

    std::size_t n_;
    double rate_;
    std::vector<cplx> spectrum_;
};

}  // namespace rbd::dsp
