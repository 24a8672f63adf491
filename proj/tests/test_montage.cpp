#include "doctest.h"

#include <algorithm>
#include <string>
#include <vector>

#include "rbd/montage.hpp"
#include "rbd/types.hpp"

using namespace rbd;

namespace {

Recording make_recording(const std::vector<std::string>& labels) {
    Recording rec;
    rec.record_duration = 1.0;
    rec.n_records = 10;
    double value = 1.0;
    for (const auto& label : labels) {
        Channel c;
        c.label = label;
        c.samples_per_record = 100;
        c.samples.assign(1000, value);  // distinct constant per channel
        value += 1.0;
        rec.channels.push_back(std::move(c));
    }
    return rec;
}

}  // namespace

TEST_CASE("EEG preference order picks C4-A1 over C3-A2") {
    const auto rec = make_recording({"C3-A2", "C4-A1", "ROC", "LOC", "ChinEMG"});
    const auto t = select_montage(rec);
    CHECK(t.source_labels[0] == "C4-A1");
    CHECK(t.eeg.samples[0] == doctest::Approx(2.0));
}

TEST_CASE("falls back to C3-A2 when C4-A1 is absent") {
    const auto rec = make_recording({"C3-A2", "ROC", "LOC", "ChinEMG"});
    const auto t = select_montage(rec);
    CHECK(t.source_labels[0] == "C3-A2");
}

TEST_CASE("missing EEG raises MontageError naming candidates") {
    const auto rec = make_recording({"ROC", "LOC", "ChinEMG"});
    CHECK_THROWS_WITH_AS(select_montage(rec),
                         doctest::Contains("no EEG"), MontageError);
}

TEST_CASE("EOG is ROC minus LOC") {
    const auto rec = make_recording({"C4-A1", "ROC", "LOC", "ChinEMG"});
    const auto t = select_montage(rec);
    // ROC constant 2.0, LOC constant 3.0 -> EOG constant -1.0
    CHECK(t.eog.samples[0] == doctest::Approx(-1.0));
    CHECK(t.source_labels[1] == "ROC - LOC");
}

TEST_CASE("referential channels derive the preferred bipolar EEG") {
    const auto rec = make_recording({"C4", "A1", "ROC", "LOC", "ChinEMG"});
    const auto t = select_montage(rec);
    CHECK(t.source_labels[0] == "C4 - A1");
    CHECK(t.eeg.samples[0] == doctest::Approx(1.0 - 2.0));
}

TEST_CASE("selection is invariant to channel order") {
    std::vector<std::string> labels = {"C3-A2", "C4-A1", "ROC", "LOC", "ChinEMG"};
    std::sort(labels.begin(), labels.end());
    do {
        const auto t = select_montage(make_recording(labels));
        CHECK(t.source_labels[0] == "C4-A1");
        CHECK(t.source_labels[2] == "ChinEMG");
    } while (std::next_permutation(labels.begin(), labels.end()));
}

TEST_CASE("missing EMG and EOG are reported") {
    CHECK_THROWS_AS(select_montage(make_recording({"C4-A1", "ROC", "LOC"})), MontageError);
    CHECK_THROWS_AS(select_montage(make_recording({"C4-A1", "ChinEMG"})), MontageError);
}
