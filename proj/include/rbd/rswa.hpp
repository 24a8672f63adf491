#pragma once

// Full-night RSWA and sleep-architecture metrics. Atonia index follows the
// corrected scheme: rectified 1-s window means, each reduced by the minimum
// window mean within a surrounding 60-s span, then the <=1 uV fraction with
// the 1-2 uV bin excluded. STREAM compares REM window variance against the
// 95th percentile of NREM window variance. Motor activity is the fraction
// of REM time inside threshold-crossing events against a slow moving
// baseline. Stage-missing cases propagate as empty optionals, never as
// exceptions.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rbd/dsp/welch.hpp"
#include "rbd/errors.hpp"
#include "rbd/features/emg.hpp"
#include "rbd/types.hpp"
#include "rbd/util/stats.hpp"

namespace rbd::rswa {

namespace detail {

// Stage of the epoch that second-window w belongs to; Unscored when off the
// end of the hypnogram.
inline Stage window_stage(const Hypnogram& h, std::size_t window, double window_s) {
    const auto epoch = static_cast<std::size_t>(double(window) * window_s / h.epoch_len);
    return epoch < h.stages.size() ? h.stages[epoch] : Stage::Unscored;
}

inline std::vector<double> centered_moving_min(const std::vector<double>& v, std::size_t half) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::size_t lo = i > half ? i - half : 0;
        const std::size_t hi = std::min(v.size(), i + half + 1);
        double m = v[lo];
        for (std::size_t j = lo + 1; j < hi; ++j) m = std::min(m, v[j]);
        out[i] = m;
    }
    return out;
}

}  // namespace detail

struct AtoniaParams {
    double window_s = 1.0;
    double correction_span_s = 60.0;  // centered span for the moving minimum
    bool corrected = true;
};

// Fraction of (corrected) low-amplitude EMG windows within `stage`.
inline std::optional<double> atonia_index(const Signal& emg, const Hypnogram& h,
                                          Stage stage = Stage::Rem,
                                          const AtoniaParams& params = {}) {
    const auto window = static_cast<std::size_t>(params.window_s * emg.rate);
    if (window == 0 || emg.samples.empty()) return std::nullopt;
    auto means = features::rectified_window_means(emg.samples, window);
    if (params.corrected) {
        const std::size_t half =
            static_cast<std::size_t>(params.correction_span_s / params.window_s / 2.0);
        const auto floor = detail::centered_moving_min(means, half);
        for (std::size_t i = 0; i < means.size(); ++i) means[i] -= floor[i];
    }
    std::vector<double> in_stage;
    for (std::size_t w = 0; w < means.size(); ++w)
        if (detail::window_stage(h, w, params.window_s) == stage) in_stage.push_back(means[w]);
    if (in_stage.empty()) return std::nullopt;
    return features::atonia_fraction(in_stage);
}

struct StreamParams {
    double window_s = 1.0;
    double nrem_percentile = 95.0;
    std::size_t min_nrem_windows = 300;  // 10 NREM epochs of 1-s windows
};

// Fraction of REM windows whose variance stays at or below the NREM-derived
// threshold; 1 = fully atonic REM.
inline std::optional<double> stream_metric(const Signal& emg, const Hypnogram& h,
                                           const StreamParams& params = {}) {
    const auto window = static_cast<std::size_t>(params.window_s * emg.rate);
    if (window == 0 || emg.samples.empty()) return std::nullopt;
    const std::size_t n_windows = emg.samples.size() / window;
    std::vector<double> rem_var;
    std::vector<double> nrem_var;
    for (std::size_t w = 0; w < n_windows; ++w) {
        const std::span<const double> seg(emg.samples.data() + w * window, window);
        const Stage s = detail::window_stage(h, w, params.window_s);
        if (s == Stage::Rem) rem_var.push_back(stats::variance(seg));
        else if (s == Stage::N1 || s == Stage::N2 || s == Stage::N3)
            nrem_var.push_back(stats::variance(seg));
    }
    if (rem_var.empty() || nrem_var.size() < params.min_nrem_windows) return std::nullopt;
    const double threshold = stats::percentile(nrem_var, params.nrem_percentile);
    std::size_t below = 0;
    for (double v : rem_var)
        if (v <= threshold) ++below;
    return double(below) / double(rem_var.size());
}

struct MotorParams {
    features::MotorEventParams events;
    double baseline_window_min = 30.0;  // moving 5th-percentile span
    double baseline_percentile = 5.0;
    double block_s = 1.0;  // baseline resolution
};

// Fraction of REM time covered by motor-activity events.
inline std::optional<double> motor_activity(const Signal& emg, const Hypnogram& h,
                                            const MotorParams& params = {}) {
    if (emg.samples.empty() || emg.rate <= 0.0) return std::nullopt;
    const auto smooth = features::rectified_smooth(emg.samples, emg.rate, params.events.smooth_s);

    // block-level moving 5th percentile as the per-sample baseline
    const auto block = static_cast<std::size_t>(params.block_s * emg.rate);
    const std::size_t n_blocks = smooth.size() / block;
    if (n_blocks == 0) return std::nullopt;
    std::vector<double> block_mean(n_blocks, 0.0);
    for (std::size_t b = 0; b < n_blocks; ++b) {
        double s = 0.0;
        for (std::size_t i = b * block; i < (b + 1) * block; ++i) s += smooth[i];
        block_mean[b] = s / double(block);
    }
    const auto half =
        static_cast<std::size_t>(params.baseline_window_min * 60.0 / params.block_s / 2.0);
    std::vector<double> block_base(n_blocks);
    for (std::size_t b = 0; b < n_blocks; ++b) {
        const std::size_t lo = b > half ? b - half : 0;
        const std::size_t hi = std::min(n_blocks, b + half + 1);
        block_base[b] = std::max(
            stats::percentile(std::span<const double>(block_mean.data() + lo, hi - lo),
                              params.baseline_percentile),
            1e-12);
    }
    std::vector<double> baseline(smooth.size());
    for (std::size_t i = 0; i < smooth.size(); ++i)
        baseline[i] = block_base[std::min(i / block, n_blocks - 1)];

    const auto events = features::detect_events(smooth, baseline, emg.rate, params.events);
    std::vector<std::uint8_t> in_event(smooth.size(), 0);
    for (const auto& e : events)
        for (std::size_t i = e.begin; i < e.end; ++i) in_event[i] = 1;

    std::size_t rem_samples = 0, rem_active = 0;
    const auto epoch_samples = static_cast<std::size_t>(h.epoch_len * emg.rate);
    for (std::size_t i = 0; i < smooth.size(); ++i) {
        const std::size_t epoch = i / epoch_samples;
        if (epoch >= h.stages.size() || h.stages[epoch] != Stage::Rem) continue;
        ++rem_samples;
        rem_active += in_event[i];
    }
    if (rem_samples == 0) return std::nullopt;
    return double(rem_active) / double(rem_samples);
}

// Mean per-epoch fractal exponent over the epochs of one stage.
inline std::optional<double> fractal_exponent_mean(const Signal& emg, const Hypnogram& h,
                                                   Stage stage) {
    const auto epoch_samples = static_cast<std::size_t>(h.epoch_len * emg.rate);
    if (epoch_samples == 0) return std::nullopt;
    const auto epoch_win = static_cast<std::size_t>(4.0 * emg.rate);
    std::vector<double> values;
    for (std::size_t e = 0; e < h.stages.size(); ++e) {
        if (h.stages[e] != stage) continue;
        if ((e + 1) * epoch_samples > emg.samples.size()) break;
        const std::span<const double> seg(emg.samples.data() + e * epoch_samples, epoch_samples);
        const auto psd = dsp::welch_psd(seg, emg.rate, epoch_win);
        values.push_back(features::emg_spectral(psd).fractal_exponent);
    }
    if (values.empty()) return std::nullopt;
    return stats::mean(values);
}

struct Architecture {
    std::optional<double> n3_ratio;  // N3 / (N1+N2+N3+REM); missing without sleep
    double sleep_efficiency = 0.0;   // sleep epochs / scored epochs
};

inline Architecture sleep_architecture(const Hypnogram& h) {
    Architecture a;
    const double n1 = double(h.count(Stage::N1));
    const double n2 = double(h.count(Stage::N2));
    const double n3 = double(h.count(Stage::N3));
    const double rem = double(h.count(Stage::Rem));
    const double w = double(h.count(Stage::W));
    const double sleep = n1 + n2 + n3 + rem;
    const double scored = sleep + w;
    if (sleep > 0.0) a.n3_ratio = n3 / sleep;
    a.sleep_efficiency = scored > 0.0 ? sleep / scored : 0.0;
    return a;
}

// The per-subject metric record: three established RSWA metrics plus the
// architecture and spectral-ratio features.
struct SubjectMetrics {
    std::string subject_id;
    std::string cohort;
    std::string staging_source = "manual";  // manual | automatic

    std::optional<double> atonia_index_rem;
    std::optional<double> stream;
    std::optional<double> motor_activity;
    std::optional<double> ai_ratio_n2;  // AI(N2)/AI(REM), eps-floored
    std::optional<double> ai_ratio_n3;
    std::optional<double> fe_ratio_n2;  // FE(N2)/FE(REM), eps-floored
    std::optional<double> fe_ratio_n3;
    std::optional<double> n3_ratio;
    std::optional<double> sleep_efficiency;

    bool complete() const {
        return atonia_index_rem && stream && motor_activity && ai_ratio_n2 && ai_ratio_n3 &&
               fe_ratio_n2 && fe_ratio_n3 && n3_ratio && sleep_efficiency;
    }

    std::vector<std::string> missing() const {
        std::vector<std::string> out;
        if (!atonia_index_rem) out.push_back("atonia_index_rem");
        if (!stream) out.push_back("stream");
        if (!motor_activity) out.push_back("motor_activity");
        if (!ai_ratio_n2) out.push_back("ai_ratio_n2");
        if (!ai_ratio_n3) out.push_back("ai_ratio_n3");
        if (!fe_ratio_n2) out.push_back("fe_ratio_n2");
        if (!fe_ratio_n3) out.push_back("fe_ratio_n3");
        if (!n3_ratio) out.push_back("n3_ratio");
        if (!sleep_efficiency) out.push_back("sleep_efficiency");
        return out;
    }
};

inline const std::vector<std::string> kMetricNames = {
    "atonia_index_rem", "stream",      "motor_activity", "ai_ratio_n2", "ai_ratio_n3",
    "fe_ratio_n2",      "fe_ratio_n3", "n3_ratio",       "sleep_efficiency"};

inline std::optional<double> metric_by_name(const SubjectMetrics& m, const std::string& name) {
    if (name == "atonia_index_rem") return m.atonia_index_rem;
    if (name == "stream") return m.stream;
    if (name == "motor_activity") return m.motor_activity;
    if (name == "ai_ratio_n2") return m.ai_ratio_n2;
    if (name == "ai_ratio_n3") return m.ai_ratio_n3;
    if (name == "fe_ratio_n2") return m.fe_ratio_n2;
    if (name == "fe_ratio_n3") return m.fe_ratio_n3;
    if (name == "n3_ratio") return m.n3_ratio;
    if (name == "sleep_efficiency") return m.sleep_efficiency;
    throw ArgumentError("unknown metric '" + name + "'");
}

struct AssembleParams {
    AtoniaParams atonia;
    StreamParams stream;
    MotorParams motor;
    double ratio_epsilon = 0.01;  // (a+eps)/(b+eps) guard for ratio features
};

inline SubjectMetrics assemble(const std::string& subject_id, const std::string& cohort,
                               const Signal& emg, const Hypnogram& h,
                               const std::string& staging_source,
                               const AssembleParams& params = {}) {
    SubjectMetrics m;
    m.subject_id = subject_id;
    m.cohort = cohort;
    m.staging_source = staging_source;

    m.atonia_index_rem = atonia_index(emg, h, Stage::Rem, params.atonia);
    m.stream = stream_metric(emg, h, params.stream);
    m.motor_activity = motor_activity(emg, h, params.motor);

    const auto eps_ratio = [&](std::optional<double> a,
                               std::optional<double> b) -> std::optional<double> {
        if (!a || !b) return std::nullopt;
        return (*a + params.ratio_epsilon) / (*b + params.ratio_epsilon);
    };
    const auto ai_n2 = atonia_index(emg, h, Stage::N2, params.atonia);
    const auto ai_n3 = atonia_index(emg, h, Stage::N3, params.atonia);
    m.ai_ratio_n2 = eps_ratio(ai_n2, m.atonia_index_rem);
    m.ai_ratio_n3 = eps_ratio(ai_n3, m.atonia_index_rem);

    // noisy near-flat spectra can fit slightly negative exponents; clamp to
    // zero so the eps-floored ratio stays defined
    const auto clamp0 = [](std::optional<double> v) -> std::optional<double> {
        if (!v) return v;
        return std::max(*v, 0.0);
    };
    const auto fe_rem = clamp0(fractal_exponent_mean(emg, h, Stage::Rem));
    const auto fe_n2 = clamp0(fractal_exponent_mean(emg, h, Stage::N2));
    const auto fe_n3 = clamp0(fractal_exponent_mean(emg, h, Stage::N3));
    m.fe_ratio_n2 = eps_ratio(fe_n2, fe_rem);
    m.fe_ratio_n3 = eps_ratio(fe_n3, fe_rem);

    const auto arch = sleep_architecture(h);
    m.n3_ratio = arch.n3_ratio;
    m.sleep_efficiency = arch.sleep_efficiency;
    return m;
}

}  // namespace rbd::rswa
