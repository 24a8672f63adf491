#pragma once

// Assembles the full per-epoch feature bank from a preprocessed montage
// triplet. Every mini-epoch statistic is reduced to the epoch level by the
// mean over the three mini-epochs, except where a feature explicitly keeps
// min/max (coastline, differential max). Non-finite intermediates are
// imputed to 0 and counted in the quality report.

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rbd/dsp/band_isolate.hpp"
#include "rbd/dsp/bands.hpp"
#include "rbd/dsp/segment.hpp"
#include "rbd/dsp/stft.hpp"
#include "rbd/dsp/welch.hpp"
#include "rbd/errors.hpp"
#include "rbd/features/cross.hpp"
#include "rbd/features/eeg.hpp"
#include "rbd/features/emg.hpp"
#include "rbd/features/eog.hpp"
#include "rbd/features/matrix.hpp"
#include "rbd/features/schema.hpp"
#include "rbd/types.hpp"
#include "rbd/util/parallel.hpp"

namespace rbd::features {

inline double hours_recorded(std::size_t epoch_index, double epoch_len = 30.0) {
    return double(epoch_index) * epoch_len / 3600.0;
}

inline FeatureSchema feature_schema() {
    FeatureSchema s;
    auto add = [&](const std::string& name) { s.names.push_back(name); };

    // EEG time domain
    add("eeg_zcr");
    add("eeg_hjorth_activity");
    add("eeg_hjorth_mobility");
    add("eeg_hjorth_complexity");
    for (int k = 1; k <= 10; ++k) {
        add("eeg_d" + std::to_string(k) + "_logamp");
        add("eeg_d" + std::to_string(k) + "_lowpow");
    }
    add("eeg_iqr");
    add("eeg_coastline_mean");
    add("eeg_coastline_min");
    add("eeg_coastline_max");
    // EEG frequency domain
    for (const auto& band : dsp::kEegBands) add(std::string("eeg_stft_") + band.name);
    for (const auto& band : dsp::kEegBands) add(std::string("eeg_rsp_") + band.name);
    add("eeg_sef95");
    // EEG nonlinear
    for (const char* band : {"delta", "lower_alpha", "alpha"}) {
        add(std::string("eeg_tkeo_") + band + "_mean");
        add(std::string("eeg_tkeo_") + band + "_sd");
    }
    for (const auto& band : dsp::kEegBands) {
        add(std::string("eeg_seo_") + band.name + "_mean");
        add(std::string("eeg_seo_") + band.name + "_sd");
    }
    // EOG
    add("eog_acf_peak");
    add("eog_variance");
    add("eog_max_peak");
    add("eog_second_peak");
    add("eog_diff_mean");
    add("eog_diff_max");
    add("eog_power_ratio_0_4");
    add("eog_dwt_haar_l4");
    add("eog_dwt_db2_l4");
    add("eog_perm_entropy");
    // EEG x EOG
    add("cross_pvalue");
    for (const auto& band : dsp::kEegBands) add(std::string("cross_coherence_") + band.name);
    // EMG
    add("emg_atonia_frac");
    add("emg_energy");
    add("emg_p75");
    add("emg_entropy");
    add("emg_motor_s");
    add("emg_fractal_exp");
    add("emg_gamma_power");
    add("emg_rel_power");
    add("emg_sef95");
    // time of night
    add("hours_recorded");
    return s;
}

struct QualityReport {
    std::size_t imputed_values = 0;
    std::map<std::string, std::size_t> by_feature;

    void merge(const QualityReport& other) {
        imputed_values += other.imputed_values;
        for (const auto& [name, count] : other.by_feature) by_feature[name] += count;
    }
};

struct ExtractResult {
    FeatureMatrix matrix;
    QualityReport quality;
};

namespace detail {

// Mean over the 3 mini values.
inline double mini_mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / double(v.size());
}

struct EpochRow {
    std::vector<double> values;
    std::size_t imputed = 0;
    std::vector<std::string> imputed_names;
};

inline EpochRow extract_epoch(std::span<const double> eeg, std::span<const double> eog,
                              std::span<const double> emg, double rate, std::size_t epoch_index,
                              const FeatureSchema& schema) {
    const std::size_t n_minis = 3;
    const std::size_t mini_len = eeg.size() / n_minis;
    const auto welch_win = static_cast<std::size_t>(2.0 * rate);   // mini-epoch spectra
    const auto epoch_win = static_cast<std::size_t>(4.0 * rate);   // epoch-level spectra
    const auto stft_win = static_cast<std::size_t>(1.0 * rate);
    const std::size_t stft_hop = stft_win / 2;

    std::vector<double> out;
    out.reserve(schema.size());

    // --- per-mini accumulators -------------------------------------------
    std::vector<double> zcr, act, mob, cpx, iqr_v, coast;
    std::vector<std::vector<double>> deriv(20);
    std::vector<std::vector<double>> stft_mag(5), rsp(5);
    std::vector<double> sef;
    std::vector<std::vector<double>> tkeo_mean(3), tkeo_sd(3), seo_mean(5), seo_sd(5);
    std::vector<double> acf, var_v, maxp, secp, dmean;
    std::vector<double> pr04, haar4, db24, pent;
    std::vector<double> pval;
    std::vector<std::vector<double>> coh(5);

    for (std::size_t mi = 0; mi < n_minis; ++mi) {
        const auto meeg = eeg.subspan(mi * mini_len, mini_len);
        const auto meog = eog.subspan(mi * mini_len, mini_len);

        // EEG time
        zcr.push_back(zero_crossing_rate(meeg, rate));
        const auto hj = hjorth(meeg);
        act.push_back(hj.activity);
        mob.push_back(hj.mobility);
        cpx.push_back(hj.complexity);
        const auto dfe = derivative_features(meeg);
        for (std::size_t j = 0; j < dfe.size(); ++j) deriv[j].push_back(dfe[j]);
        iqr_v.push_back(interquartile_range(meeg));
        coast.push_back(coastline(meeg));

        // EEG frequency
        const auto mpsd = dsp::welch_psd(meeg, rate, welch_win);
        const auto bp = band_powers(mpsd);
        for (std::size_t b = 0; b < 5; ++b) rsp[b].push_back(bp.rsp[b]);
        sef.push_back(bp.sef95);
        const auto st = dsp::stft(meeg, rate, stft_win, stft_hop);
        for (std::size_t b = 0; b < 5; ++b)
            stft_mag[b].push_back(st.mean_band_magnitude(dsp::kEegBands[b].lo_hz,
                                                         dsp::kEegBands[b].hi_hz));

        // EEG nonlinear: band-limited energy operators (shared isolation)
        const dsp::SpectrumIsolator iso(meeg, rate);
        const auto [sig_delta, sig_theta] = iso.isolate_pair(
            dsp::kDelta.lo_hz, dsp::kDelta.hi_hz, dsp::kTheta.lo_hz, dsp::kTheta.hi_hz);
        const auto [sig_alpha, sig_beta] = iso.isolate_pair(
            dsp::kAlpha.lo_hz, dsp::kAlpha.hi_hz, dsp::kBeta.lo_hz, dsp::kBeta.hi_hz);
        const auto [sig_gamma, sig_lower_alpha] = iso.isolate_pair(
            dsp::kGamma.lo_hz, dsp::kGamma.hi_hz, dsp::kLowerAlpha.lo_hz, dsp::kLowerAlpha.hi_hz);

        const std::array<const std::vector<double>*, 3> tkeo_bands = {&sig_delta, &sig_lower_alpha,
                                                                      &sig_alpha};
        for (std::size_t b = 0; b < 3; ++b) {
            const auto ts = tkeo_stats(*tkeo_bands[b]);
            tkeo_mean[b].push_back(ts.mean);
            tkeo_sd[b].push_back(ts.sd);
        }
        const std::array<const std::vector<double>*, 5> seo_bands = {&sig_delta, &sig_theta,
                                                                     &sig_alpha, &sig_beta,
                                                                     &sig_gamma};
        for (std::size_t b = 0; b < 5; ++b) {
            const auto ss = seo_stats(*seo_bands[b]);
            seo_mean[b].push_back(ss.mean);
            seo_sd[b].push_back(ss.sd);
        }

        // EOG
        const std::vector<double> eog_copy(meog.begin(), meog.end());
        acf.push_back(autocorrelation_peak(eog_copy));
        var_v.push_back(stats::variance(meog));
        const auto peaks = absolute_peaks(meog, static_cast<std::size_t>(0.25 * rate));
        maxp.push_back(peaks.max_peak);
        secp.push_back(peaks.second_max_peak);
        dmean.push_back(mean_abs_differential(meog));
        pr04.push_back(low_band_power_ratio(dsp::welch_psd(meog, rate, welch_win)));
        haar4.push_back(dwt_level4_amplitude(eog_copy, dsp::Wavelet::Haar));
        db24.push_back(dwt_level4_amplitude(eog_copy, dsp::Wavelet::Db2));
        pent.push_back(permutation_entropy(meog));

        // EEG x EOG
        pval.push_back(correlation_pvalue(meeg, meog));
        const auto bc = band_coherence(meeg, meog, rate);
        for (std::size_t b = 0; b < 5; ++b) coh[b].push_back(bc[b]);
    }

    // --- epoch-level reductions ------------------------------------------
    out.push_back(mini_mean(zcr));
    out.push_back(mini_mean(act));
    out.push_back(mini_mean(mob));
    out.push_back(mini_mean(cpx));
    for (std::size_t j = 0; j < 20; ++j) out.push_back(mini_mean(deriv[j]));
    out.push_back(mini_mean(iqr_v));
    out.push_back(mini_mean(coast));
    out.push_back(*std::min_element(coast.begin(), coast.end()));
    out.push_back(*std::max_element(coast.begin(), coast.end()));
    for (std::size_t b = 0; b < 5; ++b) out.push_back(mini_mean(stft_mag[b]));
    for (std::size_t b = 0; b < 5; ++b) out.push_back(mini_mean(rsp[b]));
    out.push_back(mini_mean(sef));
    for (std::size_t b = 0; b < 3; ++b) {
        out.push_back(mini_mean(tkeo_mean[b]));
        out.push_back(mini_mean(tkeo_sd[b]));
    }
    for (std::size_t b = 0; b < 5; ++b) {
        out.push_back(mini_mean(seo_mean[b]));
        out.push_back(mini_mean(seo_sd[b]));
    }
    out.push_back(mini_mean(acf));
    out.push_back(mini_mean(var_v));
    out.push_back(mini_mean(maxp));
    out.push_back(mini_mean(secp));
    out.push_back(mini_mean(dmean));
    out.push_back(*std::max_element(dmean.begin(), dmean.end()));
    out.push_back(mini_mean(pr04));
    out.push_back(mini_mean(haar4));
    out.push_back(mini_mean(db24));
    out.push_back(mini_mean(pent));
    out.push_back(mini_mean(pval));
    for (std::size_t b = 0; b < 5; ++b) out.push_back(mini_mean(coh[b]));

    // EMG works on the whole epoch
    out.push_back(epoch_atonia_fraction(emg, rate));
    out.push_back(mean_rectified_amplitude(emg));
    out.push_back(rectified_p75(emg));
    out.push_back(histogram_entropy(emg));
    out.push_back(epoch_motor_activity_seconds(emg, rate));
    const auto epsd = dsp::welch_psd(emg, rate, epoch_win);
    const auto es = emg_spectral(epsd);
    out.push_back(es.fractal_exponent);
    out.push_back(es.gamma_power);
    out.push_back(es.relative_power);
    out.push_back(es.sef95);

    out.push_back(hours_recorded(epoch_index));

    EpochRow row;
    row.values = std::move(out);
    for (std::size_t j = 0; j < row.values.size(); ++j) {
        if (!std::isfinite(row.values[j])) {
            row.values[j] = 0.0;
            ++row.imputed;
            row.imputed_names.push_back(schema.names[j]);
        }
    }
    return row;
}

}  // namespace detail

inline ExtractResult extract_all(const MontageTriplet& t, const std::string& subject_id = "",
                                 unsigned jobs = 1) {
    if (t.eeg.rate != t.eog.rate || t.eeg.rate != t.emg.rate)
        throw ArgumentError("extract_all: montage channels must share one rate");
    const std::size_t n = std::min({t.eeg.samples.size(), t.eog.samples.size(),
                                    t.emg.samples.size()});
    const double rate = t.eeg.rate;
    const auto grid = dsp::make_grid(n, rate);

    ExtractResult result;
    result.matrix.schema = feature_schema();
    result.matrix.subject_id = subject_id;
    const std::size_t m = result.matrix.schema.size();
    result.matrix.values.assign(grid.n_epochs * m, 0.0);

    std::vector<detail::EpochRow> rows(grid.n_epochs);
    parallel_for(grid.n_epochs, jobs, [&](std::size_t e) {
        rows[e] = detail::extract_epoch(dsp::epoch_view(t.eeg.samples, grid, e),
                                        dsp::epoch_view(t.eog.samples, grid, e),
                                        dsp::epoch_view(t.emg.samples, grid, e), rate, e,
                                        result.matrix.schema);
    });

    for (std::size_t e = 0; e < grid.n_epochs; ++e) {
        if (rows[e].values.size() != m) throw SchemaError("epoch row size mismatch");
        std::copy(rows[e].values.begin(), rows[e].values.end(),
                  result.matrix.values.begin() + static_cast<std::ptrdiff_t>(e * m));
        result.quality.imputed_values += rows[e].imputed;
        for (const auto& name : rows[e].imputed_names) ++result.quality.by_feature[name];
    }
    return result;
}

}  // namespace rbd::features
