#pragma once

// Synthetic PSG cohort generator. One subject = a semi-Markov hypnogram plus
// stage-conditioned EEG/EOG/EMG at 200 Hz, written as ordinary EDF channels
// (EEG C4-A1, ROC, LOC, chin EMG). The point is separability for the
// evaluation harness, not physiological fidelity: each stage carries a
// distinct EEG band mix, REM carries EOG saccade bursts, and the EMG floor,
// burst rate and spectral slope differ per stage and cohort with per-subject
// jitter so cross-subject correlations are meaningful.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "rbd/dsp/fft.hpp"
#include "rbd/edf.hpp"
#include "rbd/errors.hpp"
#include "rbd/types.hpp"
#include "rbd/util/rng.hpp"

namespace rbd::synth {

struct SyntheticProfile {
    std::string cohort = "HC";  // HC | RBD
    double hours = 4.0;
    double rate = 200.0;
    std::uint64_t seed = 1;

    // hypnogram template (epochs of 30 s)
    double initial_wake_epochs = 16;
    double wake_between_cycles = 1;   // mean W epochs between cycles
    double n3_epochs_per_cycle = 16;  // slow-wave pressure
    double rem_epochs_per_cycle = 10;

    // EMG
    double emg_rem_floor_uv = 0.5;   // RMS during atonic REM
    double emg_burst_prob = 0.02;    // per REM second
    double emg_burst_gain = 6.0;     // multiple of the floor
    double emg_burst_len_min_s = 0.3;
    double emg_burst_len_max_s = 2.5;
    double emg_alpha_rem = 0.3;      // spectral exponent during REM
    double emg_alpha_n2 = 1.0;
    double emg_alpha_n3 = 1.2;

    // EOG
    double eog_rem_burst_prob = 0.45;  // per REM second
    double eog_blink_prob = 0.2;       // per W second
};

// Deterministic per-subject profile with cohort-dependent parameter jitter.
inline SyntheticProfile make_profile(const std::string& cohort, std::size_t subject_index,
                                     std::uint64_t master_seed, double hours = 4.0) {
    if (cohort != "HC" && cohort != "RBD") throw ArgumentError("profile cohort must be HC or RBD");
    Rng rng = Rng::stream(master_seed, subject_index * 2 + (cohort == "RBD" ? 1 : 0));
    SyntheticProfile p;
    p.cohort = cohort;
    p.hours = hours;
    p.seed = rng.next_u64();
    const bool rbd = cohort == "RBD";

    p.initial_wake_epochs = rbd ? rng.uniform(20.0, 40.0) : rng.uniform(8.0, 20.0);
    p.wake_between_cycles = rbd ? rng.uniform(4.0, 10.0) : rng.uniform(0.0, 3.0);
    p.n3_epochs_per_cycle = rbd ? rng.uniform(3.0, 8.0) : rng.uniform(12.0, 20.0);
    p.rem_epochs_per_cycle = rbd ? rng.uniform(7.0, 12.0) : rng.uniform(8.0, 14.0);

    p.emg_rem_floor_uv = rbd ? rng.uniform(0.45, 0.8) : rng.uniform(0.3, 0.65);
    p.emg_burst_prob = rbd ? rng.uniform(0.25, 0.45) : rng.uniform(0.003, 0.015);
    p.emg_burst_gain = rbd ? rng.uniform(8.0, 16.0) : rng.uniform(4.0, 6.0);
    p.emg_burst_len_min_s = rbd ? 0.3 : 0.2;
    p.emg_burst_len_max_s = rbd ? 2.5 : 0.5;
    p.emg_alpha_rem = rng.uniform(0.15, 0.45);
    p.emg_alpha_n2 = rng.uniform(0.8, 1.2);
    p.emg_alpha_n3 = rng.uniform(1.0, 1.4);

    p.eog_rem_burst_prob = rng.uniform(0.35, 0.55);
    p.eog_blink_prob = rng.uniform(0.15, 0.3);
    return p;
}

namespace detail {

// Band-shaped noise for one epoch: amplitude per FFT bin from `shape(f)`,
// random phases, cropped to n samples, rescaled to rms_uv.
template <typename ShapeFn>
std::vector<double> shaped_noise(Rng& rng, std::size_t n, double rate, double rms_uv,
                                 ShapeFn&& shape) {
    std::size_t m = 1;
    while (m < n) m <<= 1;
    std::vector<dsp::cplx> spec(m, dsp::cplx(0.0, 0.0));
    for (std::size_t k = 1; k <= m / 2; ++k) {
        const double f = double(k) * rate / double(m);
        const double amp = shape(f);
        if (amp <= 0.0) continue;
        const double phase = rng.uniform(0.0, 2.0 * M_PI);
        const dsp::cplx v(amp * std::cos(phase), amp * std::sin(phase));
        spec[k] = v;
        if (k != m - k) spec[m - k] = std::conj(v);
    }
    dsp::fft(spec, true);
    std::vector<double> x(n);
    double power = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = spec[i].real();
        power += x[i] * x[i];
    }
    const double rms = std::sqrt(power / double(n));
    const double scale = rms > 0.0 ? rms_uv / rms : 0.0;
    for (double& v : x) v *= scale;
    return x;
}

struct BandWeight {
    double lo, hi, weight;
};

inline std::vector<double> band_noise(Rng& rng, std::size_t n, double rate, double rms_uv,
                                      const std::vector<BandWeight>& bands) {
    return shaped_noise(rng, n, rate, rms_uv, [&](double f) {
        double a = 0.0;
        for (const auto& b : bands)
            if (f >= b.lo && f <= b.hi) a += b.weight;
        return a;
    });
}

// raised-cosine pulse added in place
inline void add_pulse(std::vector<double>& x, std::size_t start, std::size_t len, double amp) {
    for (std::size_t i = 0; i < len && start + i < x.size(); ++i) {
        const double w = 0.5 - 0.5 * std::cos(2.0 * M_PI * double(i) / double(len));
        x[start + i] += amp * w;
    }
}

inline Hypnogram make_hypnogram(const SyntheticProfile& p, Rng& rng) {
    const auto n_epochs = static_cast<std::size_t>(p.hours * 3600.0 / 30.0);
    Hypnogram h;
    h.stages.reserve(n_epochs);
    auto jitter = [&](double mean) {
        return std::max(1.0, mean * rng.uniform(0.75, 1.25));
    };
    auto push = [&](Stage s, double count) {
        for (int i = 0; i < int(count + 0.5) && h.stages.size() < n_epochs; ++i)
            h.stages.push_back(s);
    };

    push(Stage::Unscored, 2);  // lights-on artifacts at the start
    push(Stage::W, jitter(p.initial_wake_epochs));
    while (h.stages.size() < n_epochs) {
        push(Stage::N1, jitter(3.0));
        push(Stage::N2, jitter(20.0));
        push(Stage::N3, jitter(p.n3_epochs_per_cycle));
        push(Stage::N2, jitter(8.0));
        push(Stage::Rem, jitter(p.rem_epochs_per_cycle));
        if (p.wake_between_cycles > 0.5) push(Stage::W, jitter(p.wake_between_cycles));
    }
    h.stages.resize(n_epochs);
    return h;
}

}  // namespace detail

struct GeneratedSubject {
    std::string subject_id;
    std::string cohort;
    Recording recording;
    Hypnogram hypnogram;
};

inline GeneratedSubject generate_subject(const SyntheticProfile& p,
                                         const std::string& subject_id = "subject") {
    if (p.hours < 0.25 || p.hours > 12.0) throw ArgumentError("profile hours out of range");
    if (p.rate <= 0.0) throw ArgumentError("profile rate must be positive");

    Rng hyp_rng = Rng::stream(p.seed, 0);
    const Hypnogram hyp = detail::make_hypnogram(p, hyp_rng);
    const auto n_epochs = hyp.stages.size();
    const auto epoch_samples = static_cast<std::size_t>(30.0 * p.rate);
    const std::size_t n = n_epochs * epoch_samples;

    std::vector<double> eeg(n, 0.0), eog(n, 0.0), emg(n, 0.0);

    for (std::size_t e = 0; e < n_epochs; ++e) {
        Rng rng = Rng::stream(p.seed, 1 + e);
        const Stage s = hyp.stages[e];
        const std::size_t base = e * epoch_samples;

        // --- EEG: stage-specific band mixture -----------------------------
        std::vector<detail::BandWeight> bands;
        double eeg_rms = 20.0;
        switch (s) {
            case Stage::W:
                bands = {{0.5, 4.0, 0.15}, {8.0, 13.0, 0.35}, {13.0, 30.0, 0.5}};
                eeg_rms = 15.0;
                break;
            case Stage::N1:
                bands = {{0.5, 4.0, 0.25}, {4.0, 8.0, 0.5}, {8.0, 13.0, 0.25}};
                eeg_rms = 20.0;
                break;
            case Stage::N2:
                bands = {{0.5, 4.0, 0.35}, {4.0, 8.0, 0.45}, {13.0, 16.0, 0.2}};
                eeg_rms = 30.0;
                break;
            case Stage::N3:
                bands = {{0.5, 2.0, 0.6}, {2.0, 4.0, 0.25}, {4.0, 8.0, 0.15}};
                eeg_rms = 60.0;
                break;
            case Stage::Rem:
                bands = {{0.5, 4.0, 0.1}, {4.0, 8.0, 0.45}, {8.0, 13.0, 0.25}, {13.0, 30.0, 0.2}};
                eeg_rms = 22.0;
                break;
            default:  // UNSCORED: broadband artifact
                bands = {{0.5, 45.0, 1.0}};
                eeg_rms = 80.0;
                break;
        }
        auto eeg_epoch = detail::band_noise(rng, epoch_samples, p.rate, eeg_rms, bands);
        if (s == Stage::N2) {
            // sleep spindles: brief 13 Hz packets
            const int n_spindles = 2 + int(rng.uniform_int(3));
            for (int sp = 0; sp < n_spindles; ++sp) {
                const auto start = rng.uniform_int(epoch_samples - 400);
                const double amp = rng.uniform(15.0, 30.0);
                for (std::size_t i = 0; i < 300; ++i) {
                    const double env = std::sin(M_PI * double(i) / 300.0);
                    eeg_epoch[start + i] +=
                        amp * env * std::sin(2.0 * M_PI * 13.0 * double(i) / p.rate);
                }
            }
        }
        std::copy(eeg_epoch.begin(), eeg_epoch.end(), eeg.begin() + std::ptrdiff_t(base));

        // --- EOG -----------------------------------------------------------
        double eog_rms = 8.0;
        std::vector<detail::BandWeight> eog_bands = {{0.3, 4.0, 0.8}, {4.0, 10.0, 0.2}};
        if (s == Stage::N1) eog_rms = 25.0;  // slow rolling movements
        auto eog_epoch = detail::band_noise(rng, epoch_samples, p.rate, eog_rms, eog_bands);
        if (s == Stage::Rem) {
            for (int sec = 0; sec < 30; ++sec) {
                if (rng.uniform() >= p.eog_rem_burst_prob) continue;
                const auto len = static_cast<std::size_t>(p.rate * rng.uniform(0.25, 0.7));
                const auto start = std::size_t(sec) * std::size_t(p.rate) +
                                   rng.uniform_int(std::size_t(p.rate / 4));
                const double amp = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(90.0, 220.0);
                detail::add_pulse(eog_epoch, start, len, amp);
            }
        } else if (s == Stage::W) {
            for (int sec = 0; sec < 30; ++sec) {
                if (rng.uniform() >= p.eog_blink_prob) continue;
                const auto len = static_cast<std::size_t>(p.rate * rng.uniform(0.15, 0.35));
                const auto start = std::size_t(sec) * std::size_t(p.rate) +
                                   rng.uniform_int(std::size_t(p.rate / 2));
                detail::add_pulse(eog_epoch, start, len, rng.uniform(120.0, 280.0));
            }
        }
        std::copy(eog_epoch.begin(), eog_epoch.end(), eog.begin() + std::ptrdiff_t(base));

        // --- EMG -----------------------------------------------------------
        double emg_rms;
        double alpha;
        switch (s) {
            case Stage::W: emg_rms = 18.0 * (0.9 + 0.2 * rng.uniform()); alpha = 0.6; break;
            case Stage::N1: emg_rms = 7.0; alpha = 0.8; break;
            case Stage::N2: emg_rms = 5.0; alpha = p.emg_alpha_n2; break;
            case Stage::N3: emg_rms = 4.0; alpha = p.emg_alpha_n3; break;
            case Stage::Rem: emg_rms = p.emg_rem_floor_uv; alpha = p.emg_alpha_rem; break;
            default: emg_rms = 25.0; alpha = 0.3; break;
        }
        // EMG content lives in the 10-100 Hz band with a f^-alpha tilt
        auto emg_epoch = detail::shaped_noise(rng, epoch_samples, p.rate, emg_rms, [&](double f) {
            if (f < 8.0) return 0.05;
            return std::pow(f / 10.0, -alpha / 2.0);
        });
        if (s == Stage::Rem) {
            for (int sec = 0; sec < 30; ++sec) {
                if (rng.uniform() >= p.emg_burst_prob) continue;
                const auto len = static_cast<std::size_t>(
                    p.rate * rng.uniform(p.emg_burst_len_min_s, p.emg_burst_len_max_s));
                const auto start = std::size_t(sec) * std::size_t(p.rate);
                const double gain = p.emg_burst_gain * rng.uniform(0.8, 1.3);
                for (std::size_t i = start; i < std::min(start + len, epoch_samples); ++i)
                    emg_epoch[i] *= gain;
            }
        } else if (s == Stage::W) {
            for (int sec = 0; sec < 30; ++sec) {
                if (rng.uniform() >= 0.1) continue;
                const auto start = std::size_t(sec) * std::size_t(p.rate);
                for (std::size_t i = start;
                     i < std::min(start + std::size_t(p.rate), epoch_samples); ++i)
                    emg_epoch[i] *= 2.5;
            }
        }
        std::copy(emg_epoch.begin(), emg_epoch.end(), emg.begin() + std::ptrdiff_t(base));
    }

    // ROC/LOC split with common-mode drift that cancels in the derivation
    Rng cm_rng = Rng::stream(p.seed, 1u << 20);
    auto common = detail::band_noise(cm_rng, n, p.rate, 10.0, {{0.3, 2.0, 1.0}});
    std::vector<double> roc(n), loc(n);
    for (std::size_t i = 0; i < n; ++i) {
        roc[i] = 0.5 * eog[i] + common[i];
        loc[i] = -0.5 * eog[i] + common[i];
    }

    GeneratedSubject out;
    out.subject_id = subject_id;
    out.cohort = p.cohort;
    out.hypnogram = hyp;
    out.recording.patient_id = subject_id;
    out.recording.recording_id = "synthetic " + p.cohort;
    out.recording.start_date = "02.01.23";
    out.recording.start_time = "23.00.00";
    out.recording.record_duration = 30.0;
    out.recording.n_records = static_cast<long long>(n_epochs);
    const auto spr = static_cast<long long>(epoch_samples);
    out.recording.channels.push_back(edf::make_channel("EEG C4-A1", "uV", std::move(eeg), spr));
    out.recording.channels.push_back(edf::make_channel("EOG ROC", "uV", std::move(roc), spr));
    out.recording.channels.push_back(edf::make_channel("EOG LOC", "uV", std::move(loc), spr));
    out.recording.channels.push_back(edf::make_channel("EMG Chin", "uV", std::move(emg), spr));
    return out;
}

struct CohortSpec {
    std::size_t n_hc = 20;
    std::size_t n_rbd = 20;
    double hours = 4.0;
    std::uint64_t seed = 20230101;
};

struct CohortMember {
    std::string subject_id;
    std::string cohort;
    SyntheticProfile profile;
};

inline std::vector<CohortMember> cohort_members(const CohortSpec& spec) {
    std::vector<CohortMember> out;
    char buf[16];
    for (std::size_t i = 0; i < spec.n_hc; ++i) {
        std::snprintf(buf, sizeof(buf), "hc%02zu", i + 1);
        out.push_back({buf, "HC", make_profile("HC", i, spec.seed, spec.hours)});
    }
    for (std::size_t i = 0; i < spec.n_rbd; ++i) {
        std::snprintf(buf, sizeof(buf), "rbd%02zu", i + 1);
        out.push_back({buf, "RBD", make_profile("RBD", spec.n_hc + i, spec.seed, spec.hours)});
    }
    return out;
}

}  // namespace rbd::synth
