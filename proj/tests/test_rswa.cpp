#include "doctest.h"

#include <cmath>
#include <optional>
#include <vector>

#include "rbd/detect.hpp"
#include "rbd/rswa.hpp"
#include "rbd/rswa_csv.hpp"
#include "rbd/util/rng.hpp"

using namespace rbd;
using namespace rbd::rswa;

namespace {

Hypnogram uniform_hyp(Stage s, std::size_t n_epochs) {
    Hypnogram h;
    h.stages.assign(n_epochs, s);
    return h;
}

// Brute-force atonia-index oracle: naive window means, naive span minimum,
// naive counting. Kept deliberately independent of the implementation.
double brute_force_atonia(const Signal& emg, const Hypnogram& h, Stage stage, bool corrected,
                          double window_s = 1.0, double span_s = 60.0) {
    const auto window = static_cast<std::size_t>(window_s * emg.rate);
    const std::size_t n_windows = emg.samples.size() / window;
    std::vector<double> means(n_windows);
    for (std::size_t w = 0; w < n_windows; ++w) {
        double s = 0.0;
        for (std::size_t i = w * window; i < (w + 1) * window; ++i)
            s += std::fabs(emg.samples[i]);
        means[w] = s / double(window);
    }
    std::vector<double> corrected_means(means);
    if (corrected) {
        const auto half = static_cast<std::size_t>(span_s / window_s / 2.0);
        for (std::size_t w = 0; w < n_windows; ++w) {
            double m = means[w];
            for (std::size_t v = (w > half ? w - half : 0); v < std::min(n_windows, w + half + 1);
                 ++v)
                m = std::min(m, means[v]);
            corrected_means[w] = means[w] - m;
        }
    }
    std::size_t low = 0, mid = 0, total = 0;
    for (std::size_t w = 0; w < n_windows; ++w) {
        const auto epoch = static_cast<std::size_t>(double(w) * window_s / h.epoch_len);
        if (epoch >= h.stages.size() || h.stages[epoch] != stage) continue;
        ++total;
        if (corrected_means[w] <= 1.0) ++low;
        else if (corrected_means[w] < 2.0) ++mid;
    }
    if (total == mid) return 0.0;
    return double(low) / double(total - mid);
}

}  // namespace

TEST_CASE("silent REM scores full atonia") {
    const Signal emg{200.0, std::vector<double>(4 * 6000, 0.0)};
    const auto h = uniform_hyp(Stage::Rem, 4);
    const auto ai = atonia_index(emg, h);
    REQUIRE(ai.has_value());
    CHECK(*ai == 1.0);
}

TEST_CASE("constant 10 uV tone: corrected scores 1, uncorrected scores 0") {
    const Signal emg{200.0, std::vector<double>(4 * 6000, 10.0)};
    const auto h = uniform_hyp(Stage::Rem, 4);

    AtoniaParams corrected;
    const auto ai_c = atonia_index(emg, h, Stage::Rem, corrected);
    REQUIRE(ai_c.has_value());
    CHECK(*ai_c == 1.0);  // correction spans exceed the tone, floor it away

    AtoniaParams uncorrected;
    uncorrected.corrected = false;
    const auto ai_u = atonia_index(emg, h, Stage::Rem, uncorrected);
    REQUIRE(ai_u.has_value());
    CHECK(*ai_u == 0.0);
}

TEST_CASE("30% bursts over a quiet floor score AI ~ 0.7") {
    Rng rng(5);
    const std::size_t n_epochs = 20;
    Signal emg{200.0, std::vector<double>(n_epochs * 6000, 0.0)};
    const auto h = uniform_hyp(Stage::Rem, n_epochs);
    const std::size_t n_windows = emg.samples.size() / 200;
    for (std::size_t w = 0; w < n_windows; ++w) {
        const bool burst = rng.uniform() < 0.3;
        for (std::size_t i = w * 200; i < (w + 1) * 200; ++i)
            emg.samples[i] = burst ? 5.0 : 0.2;
    }
    const auto ai = atonia_index(emg, h);
    REQUIRE(ai.has_value());
    const double expected = brute_force_atonia(emg, h, Stage::Rem, true);
    CHECK(*ai == doctest::Approx(expected).epsilon(1e-12));
    CHECK(*ai == doctest::Approx(0.7).epsilon(0.05));
}

TEST_CASE("atonia index matches the brute-force oracle on random nights") {
    Rng rng(71);
    for (int night = 0; night < 30; ++night) {
        const std::size_t n_epochs = 6 + rng.uniform_int(10);
        Signal emg{200.0, {}};
        emg.samples.resize(n_epochs * 6000);
        for (auto& v : emg.samples) v = rng.normal(0.0, rng.uniform(0.1, 4.0));
        Hypnogram h;
        for (std::size_t e = 0; e < n_epochs; ++e)
            h.stages.push_back(static_cast<Stage>(rng.uniform_int(6)));  // includes UNSCORED
        for (Stage stage : {Stage::Rem, Stage::N2, Stage::N3}) {
            const auto got = atonia_index(emg, h, stage);
            if (h.count(stage) == 0) {
                CHECK(!got.has_value());
                continue;
            }
            REQUIRE(got.has_value());
            CHECK(std::fabs(*got - brute_force_atonia(emg, h, stage, true)) <= 1e-9);
        }
    }
}

TEST_CASE("missing stage propagates as an empty metric, not an exception") {
    const Signal emg{200.0, std::vector<double>(4 * 6000, 0.0)};
    const auto h = uniform_hyp(Stage::N2, 4);
    CHECK(!atonia_index(emg, h, Stage::Rem).has_value());
    CHECK(!fractal_exponent_mean(emg, h, Stage::Rem).has_value());
    CHECK(!motor_activity(emg, uniform_hyp(Stage::N2, 4)).has_value());
}

TEST_CASE("uncorrected atonia is monotone under added REM amplitude") {
    Rng rng(72);
    AtoniaParams uncorrected;
    uncorrected.corrected = false;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n_epochs = 4 + rng.uniform_int(4);
        Signal emg{200.0, {}};
        emg.samples.resize(n_epochs * 6000);
        for (auto& v : emg.samples) v = rng.normal(0.0, rng.uniform(0.2, 2.5));
        Hypnogram h;
        for (std::size_t e = 0; e < n_epochs; ++e)
            h.stages.push_back(rng.uniform() < 0.5 ? Stage::Rem : Stage::N2);
        if (h.count(Stage::Rem) == 0) h.stages[0] = Stage::Rem;

        Signal louder = emg;
        for (std::size_t e = 0; e < n_epochs; ++e) {
            if (h.stages[e] != Stage::Rem) continue;
            const double add = rng.uniform(0.0, 3.0);
            for (std::size_t i = e * 6000; i < (e + 1) * 6000; ++i)
                louder.samples[i] += (louder.samples[i] >= 0.0 ? add : -add);
        }
        const auto base = atonia_index(emg, h, Stage::Rem, uncorrected);
        const auto more = atonia_index(louder, h, Stage::Rem, uncorrected);
        REQUIRE(base.has_value());
        REQUIRE(more.has_value());
        CHECK(*more <= *base + 1e-12);
    }
}

TEST_CASE("uncorrected atonia only depends on stage membership sets") {
    Rng rng(73);
    const std::size_t n_epochs = 8;
    Signal emg{200.0, {}};
    emg.samples.resize(n_epochs * 6000);
    for (auto& v : emg.samples) v = rng.normal(0.0, 1.5);
    Hypnogram h;
    for (std::size_t e = 0; e < n_epochs; ++e)
        h.stages.push_back(e % 2 == 0 ? Stage::Rem : Stage::N2);

    // consistent epoch permutation
    std::vector<std::size_t> perm = {3, 0, 7, 1, 5, 2, 6, 4};
    Signal emg2{200.0, std::vector<double>(emg.samples.size())};
    Hypnogram h2;
    for (std::size_t e = 0; e < n_epochs; ++e) {
        h2.stages.push_back(h.stages[perm[e]]);
        for (std::size_t i = 0; i < 6000; ++i)
            emg2.samples[e * 6000 + i] = emg.samples[perm[e] * 6000 + i];
    }
    AtoniaParams uncorrected;
    uncorrected.corrected = false;
    CHECK(*atonia_index(emg, h, Stage::Rem, uncorrected) ==
          *atonia_index(emg2, h2, Stage::Rem, uncorrected));
}

TEST_CASE("STREAM: atonic REM against NREM noise scores 1") {
    const std::size_t n_epochs = 16;
    Signal emg{200.0, {}};
    emg.samples.resize(n_epochs * 6000, 0.0);
    Hypnogram h;
    Rng rng(81);
    for (std::size_t e = 0; e < n_epochs; ++e) {
        const bool rem = e >= 12;
        h.stages.push_back(rem ? Stage::Rem : Stage::N2);
        if (!rem)
            for (std::size_t i = e * 6000; i < (e + 1) * 6000; ++i)
                emg.samples[i] = rng.normal(0.0, 2.0);
    }
    const auto s = stream_metric(emg, h);
    REQUIRE(s.has_value());
    CHECK(*s == 1.0);
}

TEST_CASE("STREAM: identically distributed REM sits at the threshold percentile") {
    const std::size_t n_epochs = 40;
    Signal emg{200.0, {}};
    emg.samples.resize(n_epochs * 6000);
    Rng rng(82);
    for (auto& v : emg.samples) v = rng.normal(0.0, 1.0);
    Hypnogram h;
    for (std::size_t e = 0; e < n_epochs; ++e)
        h.stages.push_back(e % 2 == 0 ? Stage::Rem : Stage::N2);
    const auto s = stream_metric(emg, h);
    REQUIRE(s.has_value());
    CHECK(*s == doctest::Approx(0.95).epsilon(0.025));
}

TEST_CASE("STREAM: tenfold REM variance collapses the metric to 0") {
    const std::size_t n_epochs = 30;
    Signal emg{200.0, {}};
    emg.samples.resize(n_epochs * 6000);
    Rng rng(83);
    Hypnogram h;
    for (std::size_t e = 0; e < n_epochs; ++e) {
        const bool rem = e % 3 == 0;
        h.stages.push_back(rem ? Stage::Rem : Stage::N2);
        const double sd = rem ? std::sqrt(10.0) : 1.0;
        for (std::size_t i = e * 6000; i < (e + 1) * 6000; ++i)
            emg.samples[i] = rng.normal(0.0, sd);
    }
    const auto s = stream_metric(emg, h);
    REQUIRE(s.has_value());
    CHECK(*s < 0.02);
}

TEST_CASE("STREAM is invariant to uniform rescaling") {
    const std::size_t n_epochs = 24;
    Signal emg{200.0, {}};
    emg.samples.resize(n_epochs * 6000);
    Rng rng(84);
    for (auto& v : emg.samples) v = rng.normal(0.0, 1.0);
    Hypnogram h;
    for (std::size_t e = 0; e < n_epochs; ++e)
        h.stages.push_back(e % 2 == 0 ? Stage::Rem : Stage::N3);
    const auto base = stream_metric(emg, h);
    REQUIRE(base.has_value());
    for (double c : {0.5, 2.0, 10.0}) {
        Signal scaled = emg;
        for (auto& v : scaled.samples) v *= c;
        const auto s = stream_metric(scaled, h);
        REQUIRE(s.has_value());
        CHECK(std::fabs(*s - *base) <= 1e-9);
    }
}

TEST_CASE("STREAM requires enough NREM context") {
    Signal emg{200.0, std::vector<double>(4 * 6000, 0.0)};
    Hypnogram h;
    h.stages = {Stage::Rem, Stage::Rem, Stage::N2, Stage::N2};  // only 2 NREM epochs
    CHECK(!stream_metric(emg, h).has_value());
}

TEST_CASE("motor activity: flat EMG scores 0") {
    const Signal emg{200.0, std::vector<double>(4 * 6000, 0.0)};
    const auto m = motor_activity(emg, uniform_hyp(Stage::Rem, 4));
    REQUIRE(m.has_value());
    CHECK(*m == 0.0);
}

TEST_CASE("motor activity: one 3-s burst in 60 s of REM is ~0.05") {
    Rng rng(85);
    const std::size_t n = 2 * 6000;  // 60 s
    Signal emg{200.0, {}};
    emg.samples.resize(n);
    for (auto& v : emg.samples) v = rng.normal(0.0, 1.0);
    for (std::size_t i = 4000; i < 4000 + 600; ++i) emg.samples[i] *= 10.0;  // 3-s burst
    const auto m = motor_activity(emg, uniform_hyp(Stage::Rem, 2));
    REQUIRE(m.has_value());
    CHECK(*m == doctest::Approx(0.05).epsilon(0.2));
    CHECK(std::fabs(*m - 0.05) <= 0.01);
}

TEST_CASE("sleep architecture hand counts") {
    SUBCASE("all-N3 night") {
        const auto a = sleep_architecture(uniform_hyp(Stage::N3, 10));
        REQUIRE(a.n3_ratio.has_value());
        CHECK(*a.n3_ratio == 1.0);
        CHECK(a.sleep_efficiency == 1.0);
    }
    SUBCASE("mixed night") {
        Hypnogram h;
        h.stages = {Stage::W, Stage::W, Stage::N2, Stage::N3, Stage::Rem, Stage::N3};
        const auto a = sleep_architecture(h);
        REQUIRE(a.n3_ratio.has_value());
        CHECK(*a.n3_ratio == doctest::Approx(0.5));
        CHECK(a.sleep_efficiency == doctest::Approx(4.0 / 6.0));
    }
    SUBCASE("all wake") {
        const auto a = sleep_architecture(uniform_hyp(Stage::W, 5));
        CHECK(!a.n3_ratio.has_value());
        CHECK(a.sleep_efficiency == 0.0);
    }
}

namespace {

// hand-built synthetic night for assemble(): alternating NREM/REM blocks
struct ToyNight {
    Signal emg{200.0, {}};
    Hypnogram hyp;
};

ToyNight make_night(bool rbd_like, std::uint64_t seed) {
    ToyNight night;
    Rng rng(seed);
    const std::size_t n_epochs = 60;
    night.emg.samples.resize(n_epochs * 6000);
    for (std::size_t e = 0; e < n_epochs; ++e) {
        Stage s;
        if (e < 6) s = Stage::W;
        else if (e % 10 < 4) s = Stage::N2;
        else if (e % 10 < 6) s = Stage::N3;
        else if (e % 10 < 8) s = Stage::Rem;
        else s = Stage::N1;
        night.hyp.stages.push_back(s);
        double sd;
        switch (s) {
            case Stage::W: sd = 12.0; break;
            case Stage::N1: sd = 6.0; break;
            case Stage::N2: sd = 5.0; break;
            case Stage::N3: sd = 4.0; break;
            default: sd = rbd_like ? 4.0 : 0.25; break;  // REM floor
        }
        for (std::size_t i = e * 6000; i < (e + 1) * 6000; ++i)
            night.emg.samples[i] = rng.normal(0.0, sd);
        if (s == Stage::Rem && rbd_like) {
            // bursty REM: 40% of seconds carry large phasic activity
            for (std::size_t w = 0; w < 30; ++w) {
                if (rng.uniform() >= 0.4) continue;
                for (std::size_t i = e * 6000 + w * 200; i < e * 6000 + (w + 1) * 200; ++i)
                    night.emg.samples[i] = rng.normal(0.0, 25.0);
            }
        }
    }
    return night;
}

}  // namespace

TEST_CASE("assemble: healthy night scores high atonia, RBD-like night does not") {
    const auto hc = make_night(false, 11);
    const auto m_hc = assemble("hc1", "HC", hc.emg, hc.hyp, "manual");
    CHECK(m_hc.complete());
    REQUIRE(m_hc.atonia_index_rem.has_value());
    CHECK(*m_hc.atonia_index_rem > 0.9);

    const auto rbd = make_night(true, 12);
    const auto m_rbd = assemble("rbd1", "RBD", rbd.emg, rbd.hyp, "manual");
    CHECK(m_rbd.complete());
    CHECK(*m_rbd.atonia_index_rem < 0.8);
    CHECK(*m_rbd.motor_activity > 0.1);
    CHECK(*m_rbd.atonia_index_rem < *m_hc.atonia_index_rem);
}

TEST_CASE("assemble flags missing REM instead of throwing") {
    const Signal emg{200.0, std::vector<double>(20 * 6000, 1.0)};
    const auto m = assemble("x", "HC", emg, uniform_hyp(Stage::N2, 20), "manual");
    CHECK(!m.complete());
    const auto missing = m.missing();
    CHECK(std::find(missing.begin(), missing.end(), "atonia_index_rem") != missing.end());
    CHECK(std::find(missing.begin(), missing.end(), "stream") != missing.end());
}

TEST_CASE("metrics CSV round-trips including missing fields") {
    const auto hc = make_night(false, 13);
    auto m = assemble("s1", "HC", hc.emg, hc.hyp, "automatic");
    m.stream.reset();  // simulate a missing metric
    const auto text = to_csv({m});
    const auto back = from_csv(text);
    REQUIRE(back.size() == 1);
    CHECK(back[0].subject_id == "s1");
    CHECK(back[0].staging_source == "automatic");
    CHECK(!back[0].stream.has_value());
    CHECK(*back[0].atonia_index_rem == doctest::Approx(*m.atonia_index_rem).epsilon(1e-8));
    CHECK_THROWS_AS(from_csv("bad header\n"), ParseError);
}

TEST_CASE("detector training and prediction on a separable toy cohort") {
    std::vector<SubjectMetrics> metrics;
    std::vector<std::string> cohorts;
    Rng rng(21);
    auto push = [&](bool rbd_like, int i) {
        SubjectMetrics m;
        m.subject_id = (rbd_like ? "r" : "h") + std::to_string(i);
        m.cohort = rbd_like ? "RBD" : "HC";
        m.atonia_index_rem = rbd_like ? rng.uniform(0.3, 0.7) : rng.uniform(0.9, 1.0);
        m.stream = rbd_like ? rng.uniform(0.4, 0.8) : rng.uniform(0.92, 1.0);
        m.motor_activity = rbd_like ? rng.uniform(0.15, 0.5) : rng.uniform(0.0, 0.04);
        m.ai_ratio_n2 = rng.uniform(0.9, 1.1);
        m.ai_ratio_n3 = rng.uniform(0.9, 1.1);
        m.fe_ratio_n2 = rbd_like ? rng.uniform(0.7, 0.9) : rng.uniform(1.0, 1.3);
        m.fe_ratio_n3 = rbd_like ? rng.uniform(0.7, 0.9) : rng.uniform(1.1, 1.4);
        m.n3_ratio = rbd_like ? rng.uniform(0.05, 0.15) : rng.uniform(0.2, 0.3);
        m.sleep_efficiency = rbd_like ? rng.uniform(0.6, 0.8) : rng.uniform(0.85, 0.95);
        metrics.push_back(m);
        cohorts.push_back(m.cohort);
    };
    for (int i = 0; i < 10; ++i) push(false, i);
    for (int i = 0; i < 10; ++i) push(true, i);

    for (auto variant : {detect::Variant::Established, detect::Variant::Additional}) {
        const auto f = detect::train_detector(metrics, cohorts, variant, 33, 100);
        CHECK(f.m_try == detect::variant_m_try(variant));
        std::size_t correct = 0;
        for (std::size_t i = 0; i < metrics.size(); ++i) {
            const auto d = detect::detect(f, metrics[i]);
            double sum = 0.0;
            for (double v : d.votes) sum += v;
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
            if (d.label == cohorts[i]) ++correct;
        }
        CHECK(correct == metrics.size());
    }
}

TEST_CASE("detector rejects single-class cohorts and missing metrics") {
    std::vector<SubjectMetrics> metrics(4);
    std::vector<std::string> cohorts = {"HC", "HC", "HC", "HC"};
    CHECK_THROWS_AS(
        detect::train_detector(metrics, cohorts, detect::Variant::Established, 1, 10),
        ArgumentError);

    SubjectMetrics incomplete;
    incomplete.subject_id = "q";
    incomplete.atonia_index_rem = 0.5;  // stream and motor_activity missing
    CHECK_THROWS_WITH_AS(detect::metric_vector(incomplete, detect::Variant::Established),
                         doctest::Contains("stream"), MissingMetricError);
}

TEST_CASE("threshold classifier separates a 1-D toy problem") {
    std::vector<double> values = {0.95, 0.97, 0.92, 0.99, 0.45, 0.6, 0.5, 0.7};
    std::vector<std::uint32_t> labels = {0, 0, 0, 0, 1, 1, 1, 1};
    const auto t = detect::fit_threshold("atonia_index_rem", values, labels);
    CHECK(t.rbd_below);
    for (std::size_t i = 0; i < values.size(); ++i)
        CHECK(t.predict(values[i]) == (labels[i] == 1 ? "RBD" : "HC"));
}
