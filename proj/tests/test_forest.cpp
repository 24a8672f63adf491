#include "doctest.h"

#include <cmath>
#include <set>
#include <vector>

#include "rbd/forest/folds.hpp"
#include "rbd/forest/forest.hpp"
#include "rbd/forest/importance.hpp"
#include "rbd/forest/serialize.hpp"
#include "rbd/util/rng.hpp"

using namespace rbd;
using namespace rbd::forest;

namespace {

struct Blobs {
    std::vector<double> values;  // row-major, 2 columns
    std::vector<std::uint32_t> labels;

    DataView view() const { return {values.data(), labels.size(), 2}; }
};

// two 2-D Gaussian blobs separated by 10 sigma
Blobs make_blobs(std::size_t n_per_class, std::uint64_t seed) {
    Blobs b;
    Rng rng(seed);
    for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
        const std::uint32_t label = i % 2;
        const double cx = label ? 10.0 : 0.0;
        b.values.push_back(rng.normal(cx, 1.0));
        b.values.push_back(rng.normal(0.0, 1.0));
        b.labels.push_back(label);
    }
    return b;
}

}  // namespace

TEST_CASE("single-class training predicts that class everywhere") {
    std::vector<double> x = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
    std::vector<std::uint32_t> y = {1, 1, 1};
    TrainConfig cfg;
    cfg.n_trees = 20;
    cfg.seed = 5;
    const auto r = train({x.data(), 3, 2}, y, {"A", "B"}, cfg);
    const auto p = r.forest.predict(std::vector<double>{100.0, -7.0});
    CHECK(p.label == 1);
    CHECK(p.votes[1] == doctest::Approx(1.0));
}

TEST_CASE("separable blobs reach 0.99 out-of-bag accuracy") {
    const auto blobs = make_blobs(100, 7);
    TrainConfig cfg;
    cfg.n_trees = 200;
    cfg.seed = 11;
    const auto r = train(blobs.view(), blobs.labels, {"A", "B"}, cfg);
    CHECK(r.oob_accuracy >= 0.99);
    CHECK(r.oob_covered == blobs.labels.size());

    // held-out points
    const auto held = make_blobs(100, 99);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < held.labels.size(); ++i)
        if (r.forest.predict(held.view().row(i)).label == held.labels[i]) ++correct;
    CHECK(double(correct) / double(held.labels.size()) >= 0.99);
}

TEST_CASE("training is deterministic: same seed gives bit-identical models") {
    const auto blobs = make_blobs(50, 13);
    TrainConfig cfg;
    cfg.n_trees = 50;
    cfg.seed = 21;
    cfg.jobs = 1;
    const auto a = train(blobs.view(), blobs.labels, {"A", "B"}, cfg);
    cfg.jobs = 2;  // thread count must not change the result
    const auto b = train(blobs.view(), blobs.labels, {"A", "B"}, cfg);
    CHECK(to_json(a.forest) == to_json(b.forest));

    cfg.seed = 22;
    const auto c = train(blobs.view(), blobs.labels, {"A", "B"}, cfg);
    CHECK(to_json(a.forest) != to_json(c.forest));
}

TEST_CASE("model JSON round-trips") {
    const auto blobs = make_blobs(30, 3);
    TrainConfig cfg;
    cfg.n_trees = 10;
    cfg.seed = 9;
    auto r = train(blobs.view(), blobs.labels, {"HC", "RBD"}, cfg);
    r.forest.schema_hash = 0xabcdef0123456789ULL;
    const std::string text = to_json(r.forest);
    const auto back = from_json(text);
    CHECK(to_json(back) == text);
    CHECK(back.classes == r.forest.classes);
    CHECK(back.schema_hash == r.forest.schema_hash);
    CHECK_THROWS_AS(from_json("{\"format\":\"nope\"}"), ParseError);
    CHECK_THROWS_AS(from_json("not json"), ParseError);
}

TEST_CASE("vote distribution sums to one") {
    const auto blobs = make_blobs(40, 17);
    TrainConfig cfg;
    cfg.n_trees = 33;
    cfg.seed = 2;
    const auto r = train(blobs.view(), blobs.labels, {"A", "B"}, cfg);
    Rng rng(55);
    for (int i = 0; i < 20; ++i) {
        const std::vector<double> x = {rng.uniform(-5.0, 15.0), rng.uniform(-5.0, 5.0)};
        const auto p = r.forest.predict(x);
        double sum = 0.0;
        for (double v : p.votes) sum += v;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("schema-size mismatch on predict raises SchemaError") {
    const auto blobs = make_blobs(10, 1);
    TrainConfig cfg;
    cfg.n_trees = 5;
    const auto r = train(blobs.view(), blobs.labels, {"A", "B"}, cfg);
    CHECK_THROWS_AS(r.forest.predict(std::vector<double>{1.0, 2.0, 3.0}), SchemaError);
}

TEST_CASE("m_try larger than the feature count is rejected") {
    const auto blobs = make_blobs(10, 1);
    TrainConfig cfg;
    cfg.m_try = 3;
    CHECK_THROWS_AS(train(blobs.view(), blobs.labels, {"A", "B"}, cfg), ArgumentError);
}

TEST_CASE("bootstrap covers every row across 500 trees") {
    const auto blobs = make_blobs(30, 23);  // 60 rows
    TrainConfig cfg;
    cfg.n_trees = 500;
    cfg.seed = 3;
    cfg.jobs = 2;
    const auto r = train(blobs.view(), blobs.labels, {"A", "B"}, cfg);
    CHECK(r.never_inbag == 0);
    CHECK(r.never_oob == 0);  // ~(1-0.368)^500 chance per row, never in practice
}

TEST_CASE("noise feature gains no permutation importance; signal feature dominates") {
    // y = sign(x0); x1 is pure noise
    Rng rng(31);
    std::vector<double> values;
    std::vector<std::uint32_t> labels;
    for (int i = 0; i < 400; ++i) {
        const double x0 = rng.uniform(-1.0, 1.0);
        values.push_back(x0);
        values.push_back(rng.uniform(-1.0, 1.0));
        labels.push_back(x0 > 0.0 ? 1 : 0);
    }
    const DataView x{values.data(), labels.size(), 2};
    TrainConfig cfg;
    cfg.n_trees = 100;
    cfg.seed = 77;
    const auto r = train(x, labels, {"neg", "pos"}, cfg);
    const auto imp = permutation_importance(r.forest, x, labels, 123, 10);
    CHECK(std::fabs(imp.delta_error[1]) <= 0.02);          // noise ~ 0
    CHECK(imp.delta_error[0] > 10.0 * std::max(imp.delta_error[1], 1e-6));
}

TEST_CASE("identity permutation produces exactly zero delta") {
    const auto blobs = make_blobs(30, 37);
    TrainConfig cfg;
    cfg.n_trees = 20;
    cfg.seed = 4;
    const auto r = train(blobs.view(), blobs.labels, {"A", "B"}, cfg);
    const double base = misclassification_rate(r.forest, blobs.view(), blobs.labels);
    std::vector<std::size_t> identity(blobs.labels.size());
    for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = i;
    for (std::size_t j = 0; j < 2; ++j)
        CHECK(column_permuted_error(r.forest, blobs.view(), blobs.labels, j, identity) == base);
}

TEST_CASE("duplicated feature column barely moves held-out accuracy") {
    const auto blobs = make_blobs(100, 41);
    const auto held = make_blobs(100, 42);

    TrainConfig cfg;
    cfg.n_trees = 100;
    cfg.seed = 8;
    cfg.m_try = 1;
    const auto base = train(blobs.view(), blobs.labels, {"A", "B"}, cfg);

    // append a copy of column 0 at train and test time
    auto dup = [](const Blobs& b) {
        std::vector<double> v;
        for (std::size_t i = 0; i < b.labels.size(); ++i) {
            v.push_back(b.values[2 * i]);
            v.push_back(b.values[2 * i + 1]);
            v.push_back(b.values[2 * i]);
        }
        return v;
    };
    const auto train3 = dup(blobs);
    const auto held3 = dup(held);
    const auto wide = train({train3.data(), blobs.labels.size(), 3}, blobs.labels, {"A", "B"}, cfg);

    auto accuracy = [](const TrainedForest& f, const DataView& x,
                       const std::vector<std::uint32_t>& y) {
        std::size_t ok = 0;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (f.predict(x.row(i)).label == y[i]) ++ok;
        return double(ok) / double(y.size());
    };
    const double a = accuracy(base.forest, held.view(), held.labels);
    const double b = accuracy(wide.forest, {held3.data(), held.labels.size(), 3}, held.labels);
    CHECK(std::fabs(a - b) < 0.01);
}

TEST_CASE("class relabelling maps predictions through the bijection") {
    const auto blobs = make_blobs(60, 51);
    // swap class ids 0 <-> 1
    std::vector<std::uint32_t> swapped(blobs.labels);
    for (auto& v : swapped) v = 1 - v;

    TrainConfig cfg;
    cfg.n_trees = 60;
    cfg.seed = 6;
    const auto f1 = train(blobs.view(), blobs.labels, {"A", "B"}, cfg);
    const auto f2 = train(blobs.view(), swapped, {"B", "A"}, cfg);

    const auto held = make_blobs(50, 52);
    for (std::size_t i = 0; i < held.labels.size(); ++i) {
        const auto p1 = f1.forest.predict(held.view().row(i));
        const auto p2 = f2.forest.predict(held.view().row(i));
        CHECK(p1.label == 1 - p2.label);
    }
}

TEST_CASE("fold plans are stratified partitions") {
    std::vector<std::string> subjects, cohorts;
    SUBCASE("20+20, k=10 gives 2+2 per fold") {
        for (int i = 0; i < 20; ++i) {
            subjects.push_back("hc" + std::to_string(i));
            cohorts.push_back("HC");
        }
        for (int i = 0; i < 20; ++i) {
            subjects.push_back("rbd" + std::to_string(i));
            cohorts.push_back("RBD");
        }
        const auto plan = make_folds(subjects, cohorts, 10, 999);
        for (int fold = 0; fold < 10; ++fold) {
            int hc = 0, rbd = 0;
            for (const auto& [subject, f] : plan.assignment)
                if (f == fold) (plan.strata.at(subject) == "HC" ? hc : rbd)++;
            CHECK(hc == 2);
            CHECK(rbd == 2);
        }
    }
    SUBCASE("53+53, k=10 gives 5 or 6 per cohort per fold") {
        for (int i = 0; i < 53; ++i) {
            subjects.push_back("hc" + std::to_string(i));
            cohorts.push_back("HC");
            subjects.push_back("rbd" + std::to_string(i));
            cohorts.push_back("RBD");
        }
        const auto plan = make_folds(subjects, cohorts, 10, 1);
        for (int fold = 0; fold < 10; ++fold) {
            int hc = 0, rbd = 0;
            for (const auto& [subject, f] : plan.assignment)
                if (f == fold) (plan.strata.at(subject) == "HC" ? hc : rbd)++;
            CHECK(hc >= 5);
            CHECK(hc <= 6);
            CHECK(rbd >= 5);
            CHECK(rbd <= 6);
        }
        // partition: every subject exactly once
        CHECK(plan.assignment.size() == subjects.size());
    }
    SUBCASE("5 subjects with k=10 is rejected") {
        for (int i = 0; i < 5; ++i) {
            subjects.push_back("s" + std::to_string(i));
            cohorts.push_back("HC");
        }
        CHECK_THROWS_AS(make_folds(subjects, cohorts, 10, 1), ArgumentError);
    }
}
