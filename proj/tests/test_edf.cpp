#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "rbd/edf.hpp"
#include "rbd/hypnogram_io.hpp"
#include "rbd/types.hpp"
#include "rbd/util/rng.hpp"

using namespace rbd;

namespace {

// Hand-built EDF bytes, independent of the writer under test.
std::vector<std::uint8_t> build_edf(int n_records, int samples_per_record,
                                    const std::vector<std::int16_t>& data,
                                    const std::string& phys_min = "-200",
                                    const std::string& phys_max = "200",
                                    const std::string& dig_min = "-2048",
                                    const std::string& dig_max = "2047") {
    auto field = [](std::string v, std::size_t w) {
        v.resize(w, ' ');
        return v;
    };
    std::string h;
    h += field("0", 8);
    h += field("patient", 80);
    h += field("recording", 80);
    h += field("01.01.20", 8);
    h += field("23.00.00", 8);
    h += field(std::to_string(256 * 2), 8);
    h += field("", 44);
    h += field(std::to_string(n_records), 8);
    h += field("1", 8);
    h += field("1", 4);
    h += field("EEG C4-A1", 16);
    h += field("AgAgCl", 80);
    h += field("uV", 8);
    h += field(phys_min, 8);
    h += field(phys_max, 8);
    h += field(dig_min, 8);
    h += field(dig_max, 8);
    h += field("", 80);
    h += field(std::to_string(samples_per_record), 8);
    h += field("", 32);
    std::vector<std::uint8_t> bytes(h.begin(), h.end());
    for (std::int16_t v : data) {
        bytes.push_back(static_cast<std::uint8_t>(v & 0xff));
        bytes.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
    }
    return bytes;
}

}  // namespace

TEST_CASE("minimal single-channel EDF parses with correct geometry") {
    std::vector<std::int16_t> data(1000, 0);
    const auto bytes = build_edf(10, 100, data);
    const Recording rec = edf::parse(bytes);
    REQUIRE(rec.channels.size() == 1);
    CHECK(rec.channels[0].samples.size() == 1000);
    CHECK(rec.channels[0].rate(rec.record_duration) == doctest::Approx(100.0));
    CHECK(rec.duration() == doctest::Approx(10.0));
    CHECK(rec.channels[0].label == "EEG C4-A1");
}

TEST_CASE("digital-to-physical scaling matches the EDF linear map") {
    // digital 0 in [-2048,2047] -> [-200,200] uV lands at ~0.0489 uV
    std::vector<std::int16_t> data(1000, 0);
    data[0] = -2048;
    data[1] = 2047;
    const auto bytes = build_edf(10, 100, data);
    const Recording rec = edf::parse(bytes);
    const double expected = -200.0 + 2048.0 * 400.0 / 4095.0;
    CHECK(rec.channels[0].samples[2] == doctest::Approx(expected).epsilon(1e-9));
    CHECK(rec.channels[0].samples[2] == doctest::Approx(0.0489).epsilon(2e-3));
    CHECK(rec.channels[0].samples[0] == doctest::Approx(-200.0));
    CHECK(rec.channels[0].samples[1] == doctest::Approx(200.0));
}

TEST_CASE("truncated EDF raises ParseError") {
    std::vector<std::int16_t> data(1000, 0);
    auto bytes = build_edf(10, 100, data);
    bytes.resize(bytes.size() - 100);  // lose part of the final record
    CHECK_THROWS_AS(edf::parse(bytes), ParseError);
}

TEST_CASE("non-numeric scaling field raises ParseError") {
    std::vector<std::int16_t> data(1000, 0);
    const auto bytes = build_edf(10, 100, data, "oops");
    CHECK_THROWS_AS(edf::parse(bytes), ParseError);
}

TEST_CASE("bad version and record-count inconsistencies raise ParseError") {
    std::vector<std::int16_t> data(1000, 0);
    auto bytes = build_edf(10, 100, data);
    SUBCASE("version") {
        bytes[0] = 'X';
        CHECK_THROWS_AS(edf::parse(bytes), ParseError);
    }
    SUBCASE("unknown record count") {
        auto bad = build_edf(-1, 100, {});
        CHECK_THROWS_AS(edf::parse(bad), ParseError);
    }
}

TEST_CASE("write/parse round-trip preserves samples bit-exactly") {
    Rng rng(42);
    Recording rec;
    rec.patient_id = "p";
    rec.recording_id = "r";
    rec.record_duration = 1.0;
    rec.n_records = 5;
    for (int ch = 0; ch < 3; ++ch) {
        std::vector<double> samples;
        for (int i = 0; i < 5 * 128; ++i) samples.push_back(rng.normal(0.0, 40.0));
        auto c = edf::make_channel("CH" + std::to_string(ch), "uV", std::move(samples), 128);
        rec.channels.push_back(std::move(c));
    }
    const auto bytes1 = edf::write(rec);
    const Recording parsed1 = edf::parse(bytes1);
    const auto bytes2 = edf::write(parsed1);
    CHECK(bytes1 == bytes2);
    const Recording parsed2 = edf::parse(bytes2);
    for (std::size_t ch = 0; ch < 3; ++ch) {
        REQUIRE(parsed1.channels[ch].samples.size() == parsed2.channels[ch].samples.size());
        for (std::size_t i = 0; i < parsed1.channels[ch].samples.size(); ++i)
            CHECK(parsed1.channels[ch].samples[i] == parsed2.channels[ch].samples[i]);
    }
}

TEST_CASE("R&K labels map onto AASM stages") {
    const auto r = map_rk_to_aasm({"S0", "S1", "S2", "S3", "S4", "REM"});
    const std::vector<Stage> expected = {Stage::W, Stage::N1, Stage::N2,
                                         Stage::N3, Stage::N3, Stage::Rem};
    CHECK(r.hypnogram.stages == expected);
    CHECK(r.unknown_labels == 0);

    const auto all_s2 = map_rk_to_aasm(std::vector<std::string>(8, "S2"));
    for (Stage s : all_s2.hypnogram.stages) CHECK(s == Stage::N2);

    const auto mt = map_rk_to_aasm({"MT"});
    CHECK(mt.hypnogram.stages[0] == Stage::Unscored);
    CHECK(mt.unknown_labels == 1);
}

TEST_CASE("stage mapping is idempotent on AASM labels") {
    const std::vector<std::string> labels = {"W", "N1", "N2", "N3", "REM", "UNSCORED"};
    const auto once = map_rk_to_aasm(labels);
    std::vector<std::string> names;
    for (Stage s : once.hypnogram.stages) names.push_back(stage_name(s));
    const auto twice = map_rk_to_aasm(names);
    CHECK(once.hypnogram.stages == twice.hypnogram.stages);
    CHECK(twice.unknown_labels == 0);
}

TEST_CASE("hypnogram sidecar round-trips including source tag") {
    Hypnogram h;
    h.stages = {Stage::W, Stage::N2, Stage::Rem, Stage::Unscored, Stage::N3};
    const std::string text = format_hypnogram_sidecar(h, "automatic");
    const auto parsed = parse_hypnogram_sidecar(text);
    CHECK(parsed.hypnogram.stages == h.stages);
    CHECK(parsed.source == "automatic");
    CHECK(parsed.unknown_labels == 0);
}

TEST_CASE("sidecar accepts R&K stage labels") {
    const auto parsed = parse_hypnogram_sidecar("# epoch_len=30\n0,S3\n1,S0\n2,REM\n");
    CHECK(parsed.hypnogram.stages ==
          std::vector<Stage>{Stage::N3, Stage::W, Stage::Rem});
}
