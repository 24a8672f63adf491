#pragma once

// Channel conditioning before feature extraction, applied to the continuous
// record (not per epoch): EEG and EOG band-passed 0.3-40 Hz; EMG notched at
// 50 and 60 Hz then high-passed at 10 Hz. At 200 Hz the EMG band's nominal
// 100 Hz upper edge sits at Nyquist, so the band-pass degenerates to a
// high-pass. All filters are applied forward-backward (zero phase).

#include <vector>

#include "rbd/dsp/fir.hpp"
#include "rbd/errors.hpp"
#include "rbd/types.hpp"

namespace rbd::dsp {

struct PreprocessSpec {
    int order = 500;
    double eeg_band_lo_hz = 0.3;
    double eeg_band_hi_hz = 40.0;
    std::vector<double> emg_notch_hz = {50.0, 60.0};
    double notch_half_width_hz = 2.0;
    double emg_band_lo_hz = 10.0;
    double emg_band_hi_hz = 100.0;
};

// Combined forward-backward kernels for the EEG/EOG path and the EMG path.
struct PreprocessKernels {
    std::vector<double> eeg_eog;
    std::vector<double> emg;
};

inline PreprocessKernels make_preprocess_kernels(double rate, const PreprocessSpec& spec = {}) {
    if (rate <= 0.0) throw ArgumentError("preprocess: rate must be positive");
    const double nyquist = rate / 2.0;

    FilterSpec eeg;
    eeg.kind = FilterKind::Bandpass;
    eeg.order = spec.order;
    eeg.rate = rate;
    eeg.edges = {spec.eeg_band_lo_hz, spec.eeg_band_hi_hz};

    std::vector<std::vector<double>> emg_chain;
    for (double hz : spec.emg_notch_hz) {
        if (hz + spec.notch_half_width_hz >= nyquist) continue;  // nothing to notch out
        emg_chain.push_back(design_notch(spec.order, hz, rate, spec.notch_half_width_hz));
    }
    FilterSpec emg_band;
    emg_band.order = spec.order;
    emg_band.rate = rate;
    if (spec.emg_band_hi_hz >= nyquist) {
        emg_band.kind = FilterKind::Highpass;
        emg_band.edges = {spec.emg_band_lo_hz};
    } else {
        emg_band.kind = FilterKind::Bandpass;
        emg_band.edges = {spec.emg_band_lo_hz, spec.emg_band_hi_hz};
    }
    emg_chain.push_back(design_fir(emg_band));

    PreprocessKernels k;
    k.eeg_eog = zero_phase_kernel(design_fir(eeg));
    k.emg = zero_phase_kernel(cascade(emg_chain));
    return k;
}

inline MontageTriplet apply_preprocessing(const MontageTriplet& t, const PreprocessSpec& spec = {}) {
    if (t.eeg.rate != t.eog.rate || t.eeg.rate != t.emg.rate)
        throw ArgumentError("preprocess: montage channels must share one rate");
    const auto kernels = make_preprocess_kernels(t.eeg.rate, spec);
    MontageTriplet out;
    out.source_labels = t.source_labels;
    out.eeg = {t.eeg.rate, apply_zero_phase(t.eeg.samples, kernels.eeg_eog)};
    out.eog = {t.eog.rate, apply_zero_phase(t.eog.samples, kernels.eeg_eog)};
    out.emg = {t.emg.rate, apply_zero_phase(t.emg.samples, kernels.emg)};
    return out;
}

}  // namespace rbd::dsp
