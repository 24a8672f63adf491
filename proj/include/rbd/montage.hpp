#pragma once

// Limited-montage selection: one EEG (preference-ordered candidates, with
// referential derivation when only e.g. C4 and A1 exist), one EOG as
// ROC - LOC, one chin EMG. Matching is label-driven only, so channel order
// in the file never changes the choice.

#include <optional>
#include <string>
#include <vector>

#include "rbd/errors.hpp"
#include "rbd/types.hpp"
#include "rbd/util/strings.hpp"

namespace rbd {

struct MontagePrefs {
    std::vector<std::string> eeg = {"C4-A1", "C3-A2", "C1-A1"};
    std::vector<std::string> eog_right = {"ROC", "EOG-R", "E2"};
    std::vector<std::string> eog_left = {"LOC", "EOG-L", "E1"};
    std::vector<std::string> eog_direct = {"ROC-LOC", "EOG"};
    std::vector<std::string> emg = {"CHIN",     "CHINEMG",   "EMGCHIN", "CHIN-EMG",
                                    "EMG-CHIN", "SUBMENTAL", "EMG1-EMG2", "EMG"};
};

namespace detail {

// "EEG C4-A1 " -> "C4-A1"; uppercases and drops modality prefixes and spaces.
inline std::string normalize_label(std::string_view label) {
    std::string s = to_upper(trim(label));
    for (const char* prefix : {"EEG ", "EOG ", "EMG "}) {
        if (s.rfind(prefix, 0) == 0) {
            s = trim(s.substr(4));
            break;
        }
    }
    std::string out;
    for (char c : s)
        if (c != ' ') out.push_back(c);
    return out;
}

struct Found {
    Signal signal;
    std::string label;
};

inline const Channel* find_normalized(const Recording& rec, const std::string& want) {
    for (const auto& c : rec.channels)
        if (normalize_label(c.label) == want) return &c;
    return nullptr;
}

inline Signal to_signal(const Channel& c, double record_duration) {
    return Signal{c.rate(record_duration), c.samples};
}

// A preference like "C4-A1" matches a channel directly, or is derived by
// subtracting referential channels "C4" and "A1" when both exist at the
// same sampling rate.
inline std::optional<Found> match_or_derive(const Recording& rec, const std::string& pref) {
    const std::string want = normalize_label(pref);
    if (const Channel* c = find_normalized(rec, want))
        return Found{to_signal(*c, rec.record_duration), c->label};
    const auto dash = want.find('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 >= want.size()) return std::nullopt;
    const Channel* a = find_normalized(rec, want.substr(0, dash));
    const Channel* b = find_normalized(rec, want.substr(dash + 1));
    if (!a || !b) return std::nullopt;
    if (a->samples_per_record != b->samples_per_record || a->samples.size() != b->samples.size())
        return std::nullopt;
    Signal s = to_signal(*a, rec.record_duration);
    for (std::size_t i = 0; i < s.samples.size(); ++i) s.samples[i] -= b->samples[i];
    return Found{std::move(s), a->label + " - " + b->label};
}

inline std::optional<Found> first_match(const Recording& rec, const std::vector<std::string>& prefs) {
    for (const auto& pref : prefs)
        if (auto found = match_or_derive(rec, pref)) return found;
    return std::nullopt;
}

}  // namespace detail

inline MontageTriplet select_montage(const Recording& rec, const MontagePrefs& prefs = {}) {
    auto eeg = detail::first_match(rec, prefs.eeg);
    if (!eeg) {
        std::string wanted;
        for (const auto& p : prefs.eeg) wanted += (wanted.empty() ? "" : ", ") + p;
        throw MontageError("no EEG candidate among: " + wanted);
    }

    std::optional<detail::Found> eog;
    const auto roc = detail::first_match(rec, prefs.eog_right);
    const auto loc = detail::first_match(rec, prefs.eog_left);
    if (roc && loc && roc->signal.rate == loc->signal.rate &&
        roc->signal.samples.size() == loc->signal.samples.size()) {
        detail::Found d;
        d.signal = roc->signal;
        for (std::size_t i = 0; i < d.signal.samples.size(); ++i)
            d.signal.samples[i] -= loc->signal.samples[i];
        d.label = roc->label + " - " + loc->label;
        eog = std::move(d);
    } else {
        eog = detail::first_match(rec, prefs.eog_direct);
    }
    if (!eog) throw MontageError("no EOG: need ROC and LOC (or a derived EOG channel)");

    auto emg = detail::first_match(rec, prefs.emg);
    if (!emg) throw MontageError("no chin EMG channel");

    MontageTriplet t;
    t.eeg = std::move(eeg->signal);
    t.eog = std::move(eog->signal);
    t.emg = std::move(emg->signal);
    t.source_labels = {eeg->label, eog->label, emg->label};
    return t;
}

}  // namespace rbd
