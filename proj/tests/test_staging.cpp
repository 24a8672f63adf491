#include "doctest.h"

#include <cmath>
#include <vector>

#include "rbd/staging.hpp"
#include "rbd/util/rng.hpp"

using namespace rbd;
using namespace rbd::staging;

namespace {

Hypnogram make_hyp(std::initializer_list<Stage> stages) {
    Hypnogram h;
    h.stages = stages;
    return h;
}

}  // namespace

TEST_CASE("kappa of identical hypnograms is exactly 1") {
    const auto a = make_hyp({Stage::W, Stage::N2, Stage::Rem, Stage::N3, Stage::N1});
    CHECK(cohens_kappa(a, a) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kappa hand case: full disagreement with symmetric marginals") {
    const auto a = make_hyp({Stage::W, Stage::W, Stage::N2, Stage::N2});
    const auto b = make_hyp({Stage::N2, Stage::N2, Stage::W, Stage::W});
    // p_o = 0, p_e = 0.5 -> kappa = -1
    CHECK(cohens_kappa(a, b) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("kappa is symmetric and handles constant raters") {
    const auto a = make_hyp({Stage::W, Stage::N1, Stage::N2, Stage::N2, Stage::Rem});
    const auto b = make_hyp({Stage::W, Stage::N2, Stage::N2, Stage::N3, Stage::Rem});
    CHECK(cohens_kappa(a, b) == doctest::Approx(cohens_kappa(b, a)).epsilon(1e-12));

    const auto c1 = make_hyp({Stage::N2, Stage::N2, Stage::N2});
    CHECK(cohens_kappa(c1, c1) == 1.0);  // p_e = 1 convention
}

TEST_CASE("UNSCORED epochs are excluded pairwise; all-unscored is undefined") {
    const auto a = make_hyp({Stage::W, Stage::Unscored, Stage::N2, Stage::N2});
    const auto b = make_hyp({Stage::W, Stage::N2, Stage::Unscored, Stage::N2});
    // usable pairs: epochs 0 and 3, both agree
    CHECK(cohens_kappa(a, b) == 1.0);

    const auto u = make_hyp({Stage::Unscored, Stage::Unscored});
    CHECK_THROWS_AS(cohens_kappa(u, u), UndefinedError);
    CHECK_THROWS_AS(cohens_kappa(a, make_hyp({Stage::W})), ArgumentError);
}

TEST_CASE("independent random stagings score kappa around zero") {
    Rng rng(101);
    Hypnogram a, b;
    for (int i = 0; i < 10000; ++i) {
        a.stages.push_back(static_cast<Stage>(rng.uniform_int(5)));
        b.stages.push_back(static_cast<Stage>(rng.uniform_int(5)));
    }
    CHECK(std::fabs(cohens_kappa(a, b)) < 0.05);
}

TEST_CASE("2x2 confusion hand case gives the textbook metric values") {
    // stage N2 vs everything else: TP=8, FN=2, FP=1, TN=9
    Hypnogram truth, pred;
    auto push = [&](Stage t, Stage p, int n) {
        for (int i = 0; i < n; ++i) {
            truth.stages.push_back(t);
            pred.stages.push_back(p);
        }
    };
    push(Stage::N2, Stage::N2, 8);  // TP
    push(Stage::N2, Stage::W, 2);   // FN
    push(Stage::W, Stage::N2, 1);   // FP
    push(Stage::W, Stage::W, 9);    // TN
    const auto m = stage_metrics(pred, truth);
    const auto& n2 = m.per_stage[stage_class(Stage::N2)];
    CHECK(*n2.sensitivity == doctest::Approx(0.8));
    CHECK(*n2.specificity == doctest::Approx(0.9));
    CHECK(*n2.precision == doctest::Approx(8.0 / 9.0));
    CHECK(*n2.accuracy == doctest::Approx(17.0 / 20.0));
}

TEST_CASE("perfect prediction scores 1.0 everywhere; absent stages are missing") {
    const auto truth = make_hyp({Stage::W, Stage::N2, Stage::N2, Stage::Rem});
    const auto m = stage_metrics(truth, truth);
    for (Stage s : {Stage::W, Stage::N2, Stage::Rem}) {
        const auto& sc = m.per_stage[stage_class(s)];
        CHECK(*sc.accuracy == 1.0);
        CHECK(*sc.sensitivity == 1.0);
        CHECK(*sc.specificity == 1.0);
        CHECK(*sc.f1 == 1.0);
    }
    // N1 never occurs in truth or prediction: sensitivity/precision missing
    const auto& n1 = m.per_stage[stage_class(Stage::N1)];
    CHECK(!n1.sensitivity.has_value());
    CHECK(!n1.precision.has_value());
    CHECK(n1.specificity.has_value());
}

TEST_CASE("all-N2 truth vs all-W prediction: N2 sensitivity 0, W specificity 0") {
    Hypnogram truth, pred;
    for (int i = 0; i < 10; ++i) {
        truth.stages.push_back(Stage::N2);
        pred.stages.push_back(Stage::W);
    }
    const auto m = stage_metrics(pred, truth);
    CHECK(*m.per_stage[stage_class(Stage::N2)].sensitivity == 0.0);
    CHECK(*m.per_stage[stage_class(Stage::W)].specificity == 0.0);
}

TEST_CASE("metrics are invariant to consistent epoch permutation") {
    Rng rng(7);
    Hypnogram truth, pred;
    for (int i = 0; i < 200; ++i) {
        truth.stages.push_back(static_cast<Stage>(rng.uniform_int(5)));
        pred.stages.push_back(static_cast<Stage>(rng.uniform_int(5)));
    }
    std::vector<std::size_t> perm(truth.stages.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    Rng rng2(8);
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng2.uniform_int(i)]);
    Hypnogram truth2, pred2;
    for (std::size_t i : perm) {
        truth2.stages.push_back(truth.stages[i]);
        pred2.stages.push_back(pred.stages[i]);
    }
    const auto a = stage_metrics(pred, truth);
    const auto b = stage_metrics(pred2, truth2);
    CHECK(a.confusion == b.confusion);
    CHECK(cohens_kappa(pred, truth) == doctest::Approx(cohens_kappa(pred2, truth2)).epsilon(1e-12));
}

namespace {

// tiny synthetic staging dataset: 1-D feature that encodes the stage with
// slight noise, several subjects
std::vector<CvSubject> toy_dataset(int n_subjects, int epochs_per_subject, std::uint64_t seed) {
    std::vector<CvSubject> out;
    Rng rng(seed);
    for (int s = 0; s < n_subjects; ++s) {
        CvSubject subject;
        subject.subject_id = "s" + std::to_string(s);
        subject.cohort = s % 2 == 0 ? "HC" : "RBD";
        subject.features.schema.names = {"f0", "f1"};
        for (int e = 0; e < epochs_per_subject; ++e) {
            const auto stage = static_cast<std::uint32_t>(rng.uniform_int(5));
            subject.manual.stages.push_back(static_cast<Stage>(stage));
            subject.features.values.push_back(double(stage) + rng.normal(0.0, 0.05));
            subject.features.values.push_back(rng.normal(0.0, 1.0));
        }
        out.push_back(std::move(subject));
    }
    return out;
}

}  // namespace

TEST_CASE("run_cv stages a separable toy cohort nearly perfectly") {
    const auto dataset = toy_dataset(8, 60, 3);
    CvConfig cfg;
    cfg.k = 4;
    cfg.fold_seed = 5;
    cfg.train.n_trees = 40;
    cfg.train.seed = 11;
    const auto r = run_cv(dataset, cfg);
    CHECK(r.combined.kappa >= 0.9);
    CHECK(r.predicted.size() == dataset.size());
    REQUIRE(r.per_cohort.size() == 2);
    CHECK(r.combined.scored_epochs() == 8 * 60);

    // determinism
    const auto r2 = run_cv(dataset, cfg);
    CHECK(r2.combined.kappa == r.combined.kappa);
    for (const auto& [id, hyp] : r.predicted) CHECK(r2.predicted.at(id).stages == hyp.stages);
}

TEST_CASE("run_cv with two subjects and k=2 trains on exactly one subject per fold") {
    const auto dataset = toy_dataset(2, 40, 9);
    CvConfig cfg;
    cfg.k = 2;
    cfg.train.n_trees = 10;
    const auto r = run_cv(dataset, cfg);
    CHECK(r.predicted.size() == 2);
}

TEST_CASE("stage_recording: constant forest gives a constant hypnogram, empty input empty output") {
    // stump forest always voting N2: build from a single-class training set
    std::vector<double> x = {0.0, 0.0};
    std::vector<std::uint32_t> y = {stage_class(Stage::N2), stage_class(Stage::N2)};
    forest::TrainConfig cfg;
    cfg.n_trees = 7;
    auto trained = forest::train({x.data(), 2, 1}, y, kStageClasses, cfg);

    features::FeatureMatrix feats;
    feats.schema.names = {"f0"};
    trained.forest.schema_hash = feats.schema.hash();
    for (int i = 0; i < 5; ++i) feats.append_row(std::vector<double>{double(i)});
    const auto hyp = stage_recording(trained.forest, feats);
    REQUIRE(hyp.stages.size() == 5);
    for (Stage s : hyp.stages) CHECK(s == Stage::N2);

    features::FeatureMatrix empty;
    empty.schema.names = {"f0"};
    const auto none = stage_recording(trained.forest, empty);
    CHECK(none.stages.empty());

    features::FeatureMatrix wrong;
    wrong.schema.names = {"other"};
    CHECK_THROWS_AS(stage_recording(trained.forest, wrong), SchemaError);
}
