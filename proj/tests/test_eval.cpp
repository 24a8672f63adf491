#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <vector>

#include "rbd/eval.hpp"
#include "rbd/report.hpp"
#include "rbd/util/io.hpp"
#include "rbd/util/rng.hpp"

using namespace rbd;
using namespace rbd::eval;

namespace {

rswa::SubjectMetrics make_metrics(const std::string& id, const std::string& cohort,
                                  const std::string& arm, double base) {
    rswa::SubjectMetrics m;
    m.subject_id = id;
    m.cohort = cohort;
    m.staging_source = arm;
    m.atonia_index_rem = base;
    m.stream = base;
    m.motor_activity = 1.0 - base;
    m.ai_ratio_n2 = base;
    m.ai_ratio_n3 = base;
    m.fe_ratio_n2 = base;
    m.fe_ratio_n3 = base;
    m.n3_ratio = base / 4.0;
    m.sleep_efficiency = base;
    return m;
}

}  // namespace

TEST_CASE("identical arms correlate perfectly") {
    std::vector<rswa::SubjectMetrics> manual, autom;
    Rng rng(1);
    for (int i = 0; i < 10; ++i) {
        const double v = rng.uniform(0.2, 0.9);
        manual.push_back(make_metrics("s" + std::to_string(i), "HC", "manual", v));
        autom.push_back(make_metrics("s" + std::to_string(i), "HC", "automatic", v));
    }
    for (const auto& row : metric_correlation(manual, autom)) {
        REQUIRE(row.r.has_value());
        CHECK(*row.r == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(row.n == 10);
    }
}

TEST_CASE("small perturbations keep correlation high; correlation is symmetric") {
    std::vector<rswa::SubjectMetrics> manual, autom;
    Rng rng(2);
    for (int i = 0; i < 50; ++i) {
        const double v = rng.uniform(0.0, 1.0);
        manual.push_back(make_metrics("s" + std::to_string(i), "HC", "manual", v));
        autom.push_back(
            make_metrics("s" + std::to_string(i), "HC", "automatic", v + rng.normal(0.0, 0.01)));
    }
    const auto ab = metric_correlation(manual, autom);
    const auto ba = metric_correlation(autom, manual);
    for (std::size_t j = 0; j < ab.size(); ++j) {
        REQUIRE(ab[j].r.has_value());
        CHECK(*ab[j].r > 0.9);
        CHECK(*ab[j].r <= 1.0);
        CHECK(*ab[j].r == doctest::Approx(*ba[j].r).epsilon(1e-12));
    }
}

TEST_CASE("anti-correlated toy vectors give r = -1") {
    std::vector<double> a = {1.0, 2.0, 3.0}, b = {3.0, 2.0, 1.0};
    CHECK(stats::pearson(a, b) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("fewer than 3 matched subjects is undefined") {
    std::vector<rswa::SubjectMetrics> manual = {make_metrics("a", "HC", "manual", 0.5),
                                                make_metrics("b", "HC", "manual", 0.6)};
    std::vector<rswa::SubjectMetrics> autom = {make_metrics("a", "HC", "automatic", 0.5),
                                               make_metrics("b", "HC", "automatic", 0.6)};
    CHECK_THROWS_AS(metric_correlation(manual, autom), UndefinedError);
}

TEST_CASE("missing metrics are excluded pairwise, not fatally") {
    std::vector<rswa::SubjectMetrics> manual, autom;
    for (int i = 0; i < 6; ++i) {
        manual.push_back(make_metrics("s" + std::to_string(i), "HC", "manual", 0.1 * i + 0.2));
        autom.push_back(make_metrics("s" + std::to_string(i), "HC", "automatic", 0.1 * i + 0.2));
    }
    autom[0].stream.reset();
    autom[1].stream.reset();
    const auto rows = metric_correlation(manual, autom);
    for (const auto& row : rows) {
        if (row.metric == "stream") CHECK(row.n == 4);
        else CHECK(row.n == 6);
    }
}

TEST_CASE("detection CV emits the comparison-table rows in fixed order") {
    std::vector<rswa::SubjectMetrics> metrics;
    std::vector<std::string> ids, cohorts;
    Rng rng(5);
    for (int i = 0; i < 20; ++i) {
        const bool rbd = i >= 10;
        auto m = make_metrics((rbd ? "r" : "h") + std::to_string(i), rbd ? "RBD" : "HC", "manual",
                              rbd ? rng.uniform(0.3, 0.6) : rng.uniform(0.85, 1.0));
        metrics.push_back(m);
        ids.push_back(m.subject_id);
        cohorts.push_back(m.cohort);
    }
    const auto plan = forest::make_folds(ids, cohorts, 5, 3);
    DetectionCvConfig cfg;
    cfg.k = 5;
    cfg.n_trees = 60;
    const auto rows = detection_cv(metrics, "manual", plan, cfg);
    REQUIRE(rows.size() == kDetectionRowOrder.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].classifier == kDetectionRowOrder[i]);
        CHECK(rows[i].staging == "manual");
        CHECK(rows[i].n == 20);
        CHECK(rows[i].accuracy >= 0.9);  // cleanly separable toy data
    }

    const auto csv = report::detection_csv(rows);
    for (const auto& name : kDetectionRowOrder) CHECK(csv.find(name) != std::string::npos);
}

TEST_CASE("detector importance ranks the separating metric on top") {
    std::vector<rswa::SubjectMetrics> metrics;
    Rng rng(6);
    for (int i = 0; i < 30; ++i) {
        const bool rbd = i % 2 == 1;
        // only atonia_index_rem separates; everything else is noise
        auto m = make_metrics((rbd ? "r" : "h") + std::to_string(i), rbd ? "RBD" : "HC", "manual",
                              rng.uniform(0.0, 1.0));
        m.atonia_index_rem = rbd ? rng.uniform(0.2, 0.45) : rng.uniform(0.55, 0.8);
        metrics.push_back(m);
    }
    const auto rows = detector_importance(metrics, 9, 150, 10);
    REQUIRE(!rows.empty());
    CHECK(rows[0].feature == "atonia_index_rem");
    CHECK(rows[0].delta_error > 0.1);
}

TEST_CASE("confusion CSV rows sum to the annotated counts") {
    staging::Confusion c{};
    c[0][0] = 5;
    c[0][2] = 3;   // 8 annotated W
    c[2][2] = 10;  // 10 annotated N2
    c[4][4] = 7;   // 7 annotated REM
    const auto csv = report::confusion_csv(c);
    CHECK(csv.find("W,5,0,3,0,0") != std::string::npos);
    CHECK(csv.find("N2,0,0,10,0,0") != std::string::npos);
    CHECK(csv.find("REM,0,0,0,0,7") != std::string::npos);
}

TEST_CASE("SVG renderers produce well-formed deterministic documents") {
    const auto scatter =
        report::svg_scatter("x", {0.1, 0.5, 0.9}, {0.12, 0.48, 0.95}, "manual", "automatic");
    CHECK(scatter.rfind("<svg", 0) == 0);
    CHECK(scatter.find("</svg>") != std::string::npos);
    CHECK(scatter == report::svg_scatter("x", {0.1, 0.5, 0.9}, {0.12, 0.48, 0.95}, "manual",
                                         "automatic"));

    staging::Confusion c{};
    c[1][1] = 3;
    const auto conf = report::svg_confusion("c", c);
    CHECK(conf.find("</svg>") != std::string::npos);

    const auto bars = report::svg_bars("b", {"a", "b"}, {0.4, 0.1});
    CHECK(bars.find("</svg>") != std::string::npos);
}

TEST_CASE("report writer emits a sorted manifest with content hashes") {
    const auto dir = std::filesystem::temp_directory_path() / "rbd_report_test";
    std::filesystem::remove_all(dir);
    report::ReportWriter w(dir);
    w.add("b/second.csv", "2\n");
    w.add("a/first.csv", "1\n");
    const auto manifest = w.finalize();
    CHECK(manifest.find("a/first.csv") < manifest.find("b/second.csv"));
    CHECK(manifest.find(Sha256::hex("1\n")) != std::string::npos);
    CHECK(std::filesystem::exists(dir / "MANIFEST.csv"));
    CHECK(read_text_file(dir / "MANIFEST.csv") == manifest);
    std::filesystem::remove_all(dir);
}

TEST_CASE("SHA-256 matches known test vectors") {
    CHECK(Sha256::hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(Sha256::hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
