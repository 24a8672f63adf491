#pragma once

// Random forest classifier: CART trees with Gini impurity, bootstrap
// bagging, m_try feature sampling at every node, grown to purity with
// min_leaf = 1 (Breiman defaults). Each tree draws from its own RNG stream
// derived from (seed, tree index), so training is reproducible regardless
// of thread count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rbd/errors.hpp"
#include "rbd/util/parallel.hpp"
#include "rbd/util/rng.hpp"

namespace rbd::forest {

// Row-major borrowed matrix view.
struct DataView {
    const double* data = nullptr;
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;

    double at(std::size_t r, std::size_t c) const { return data[r * n_cols + c]; }
    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(data + r * n_cols, n_cols);
    }
};

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::vector<std::uint32_t> counts;  // class counts at leaves
};

struct Tree {
    std::vector<TreeNode> nodes;

    const TreeNode& walk(std::span<const double> x) const {
        std::size_t i = 0;
        while (nodes[i].feature >= 0)
            i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <=
                                                 nodes[i].threshold
                                             ? nodes[i].left
                                             : nodes[i].right);
        return nodes[i];
    }

    // Vote of one tree: argmax of leaf counts, lowest class index on ties.
    std::size_t vote(std::span<const double> x) const {
        const auto& leaf = walk(x);
        std::size_t best = 0;
        for (std::size_t c = 1; c < leaf.counts.size(); ++c)
            if (leaf.counts[c] > leaf.counts[best]) best = c;
        return best;
    }
};

struct Prediction {
    std::size_t label = 0;
    std::vector<double> votes;  // fraction of trees per class, sums to 1
};

struct TrainConfig {
    std::size_t n_trees = 500;
    std::size_t m_try = 0;  // 0 -> floor(sqrt(n_features))
    std::size_t min_leaf = 1;
    std::uint64_t seed = 1;
    unsigned jobs = 1;
};

struct TrainedForest {
    std::vector<std::string> classes;
    std::uint64_t schema_hash = 0;
    std::uint64_t seed = 0;
    std::size_t n_features = 0;
    std::size_t m_try = 0;
    std::size_t min_leaf = 1;
    std::vector<Tree> trees;

    Prediction predict(std::span<const double> x) const {
        if (x.size() != n_features)
            throw SchemaError("predict: expected " + std::to_string(n_features) +
                              " features, got " + std::to_string(x.size()));
        Prediction p;
        p.votes.assign(classes.size(), 0.0);
        for (const auto& tree : trees) p.votes[tree.vote(x)] += 1.0;
        for (double& v : p.votes) v /= double(trees.size());
        for (std::size_t c = 1; c < p.votes.size(); ++c)
            if (p.votes[c] > p.votes[p.label]) p.label = c;
        return p;
    }
};

namespace detail {

struct TreeBuilder {
    const DataView& x;
    const std::vector<std::uint32_t>& y;
    std::size_t n_classes;
    std::size_t m_try;
    std::size_t min_leaf;
    Rng& rng;

    std::vector<std::uint32_t> rows;             // in-bag sample, partitioned in place
    std::vector<std::uint32_t> feature_pool;     // scratch for m_try sampling
    std::vector<std::pair<double, std::uint32_t>> scratch;  // (value, label)

    struct Split {
        bool found = false;
        std::size_t feature = 0;
        double threshold = 0.0;
        double score = -1.0;
    };

    // Maximizes sum over children of (sum_k count_k^2) / n_child, which is
    // equivalent to minimizing weighted Gini impurity.
    Split best_split(std::size_t begin, std::size_t end,
                     std::span<const std::uint32_t> parent_counts) {
        Split best;
        const std::size_t n = end - begin;
        double parent_sumsq = 0.0;
        for (std::uint32_t c : parent_counts) parent_sumsq += double(c) * double(c);
        const double parent_score = parent_sumsq / double(n);

        // m_try features without replacement (partial Fisher-Yates)
        const std::size_t n_features = x.n_cols;
        feature_pool.resize(n_features);
        for (std::size_t i = 0; i < n_features; ++i) feature_pool[i] = std::uint32_t(i);
        const std::size_t tries = std::min(m_try, n_features);
        for (std::size_t i = 0; i < tries; ++i) {
            const std::size_t j = i + rng.uniform_int(n_features - i);
            std::swap(feature_pool[i], feature_pool[j]);
        }

        std::vector<double> left_counts(n_classes);
        for (std::size_t fi = 0; fi < tries; ++fi) {
            const std::size_t f = feature_pool[fi];
            scratch.clear();
            for (std::size_t i = begin; i < end; ++i)
                scratch.emplace_back(x.at(rows[i], f), y[rows[i]]);
            std::sort(scratch.begin(), scratch.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            if (scratch.front().first == scratch.back().first) continue;  // constant feature

            std::fill(left_counts.begin(), left_counts.end(), 0.0);
            double left_sumsq = 0.0, right_sumsq = parent_sumsq;
            std::size_t n_left = 0;
            for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
                const auto label = scratch[i].second;
                // incremental sum-of-squares updates
                left_sumsq += 2.0 * left_counts[label] + 1.0;
                left_counts[label] += 1.0;
                const double moved = double(parent_counts[label]) - left_counts[label];
                right_sumsq -= 2.0 * moved + 1.0;
                ++n_left;
                if (scratch[i].first == scratch[i + 1].first) continue;  // not a boundary
                if (n_left < min_leaf || (n - n_left) < min_leaf) continue;
                const double score = left_sumsq / double(n_left) +
                                     right_sumsq / double(n - n_left);
                if (score > best.score + 1e-12) {
                    best.found = true;
                    best.score = score;
                    best.feature = f;
                    best.threshold = 0.5 * (scratch[i].first + scratch[i + 1].first);
                }
            }
        }
        if (best.found && best.score <= parent_score + 1e-12) best.found = false;
        return best;
    }

    void build(Tree& tree, std::size_t begin, std::size_t end, std::int32_t node_index) {
        std::vector<std::uint32_t> counts(n_classes, 0);
        for (std::size_t i = begin; i < end; ++i) ++counts[y[rows[i]]];
        std::size_t n_present = 0;
        for (std::uint32_t c : counts)
            if (c > 0) ++n_present;

        auto make_leaf = [&] { tree.nodes[std::size_t(node_index)].counts = std::move(counts); };

        if (n_present <= 1 || end - begin < 2 * min_leaf) {
            make_leaf();
            return;
        }
        const auto split = best_split(begin, end, counts);
        if (!split.found) {
            make_leaf();
            return;
        }

        const auto mid_it = std::partition(rows.begin() + std::ptrdiff_t(begin),
                                           rows.begin() + std::ptrdiff_t(end),
                                           [&](std::uint32_t r) {
                                               return x.at(r, split.feature) <= split.threshold;
                                           });
        const auto mid = static_cast<std::size_t>(mid_it - rows.begin());
        if (mid == begin || mid == end) {  // numerically degenerate split
            make_leaf();
            return;
        }

        auto& node = tree.nodes[std::size_t(node_index)];
        node.feature = std::int32_t(split.feature);
        node.threshold = split.threshold;
        node.left = std::int32_t(tree.nodes.size());
        node.right = node.left + 1;
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        const auto left = tree.nodes[std::size_t(node_index)].left;
        const auto right = tree.nodes[std::size_t(node_index)].right;
        build(tree, begin, mid, left);
        build(tree, mid, end, right);
    }
};

}  // namespace detail

struct TrainResult {
    TrainedForest forest;
    double oob_accuracy = 0.0;   // majority OOB vote vs truth
    std::size_t oob_covered = 0; // rows that were out-of-bag at least once
    std::size_t never_oob = 0;   // rows in-bag in every tree
    std::size_t never_inbag = 0; // rows out-of-bag in every tree
};

inline TrainResult train(const DataView& x, const std::vector<std::uint32_t>& y,
                         const std::vector<std::string>& classes, const TrainConfig& config = {}) {
    if (x.n_rows == 0 || y.size() != x.n_rows) throw ArgumentError("train: bad X/y sizes");
    if (classes.empty()) throw ArgumentError("train: no classes");
    for (std::uint32_t label : y)
        if (label >= classes.size()) throw ArgumentError("train: label out of range");
    const std::size_t m_try =
        config.m_try > 0 ? config.m_try
                         : static_cast<std::size_t>(std::sqrt(double(x.n_cols)));
    if (m_try > x.n_cols) throw ArgumentError("train: m_try exceeds feature count");

    TrainResult result;
    auto& forest = result.forest;
    forest.classes = classes;
    forest.seed = config.seed;
    forest.n_features = x.n_cols;
    forest.m_try = std::max<std::size_t>(1, m_try);
    forest.min_leaf = std::max<std::size_t>(1, config.min_leaf);
    forest.trees.resize(config.n_trees);

    std::vector<std::vector<std::uint8_t>> in_bag(config.n_trees);
    parallel_for(config.n_trees, config.jobs, [&](std::size_t t) {
        Rng rng = Rng::stream(config.seed, t);
        detail::TreeBuilder builder{x, y, classes.size(), forest.m_try, forest.min_leaf, rng,
                                    {}, {}, {}};
        builder.rows.resize(x.n_rows);
        in_bag[t].assign(x.n_rows, 0);
        for (std::size_t i = 0; i < x.n_rows; ++i) {
            const auto pick = static_cast<std::uint32_t>(rng.uniform_int(x.n_rows));
            builder.rows[i] = pick;
            in_bag[t][pick] = 1;
        }
        forest.trees[t].nodes.clear();
        forest.trees[t].nodes.emplace_back();
        builder.build(forest.trees[t], 0, x.n_rows, 0);
    });

    // out-of-bag evaluation
    std::vector<std::vector<std::uint32_t>> oob_votes(x.n_rows,
                                                      std::vector<std::uint32_t>(classes.size(), 0));
    for (std::size_t t = 0; t < config.n_trees; ++t)
        for (std::size_t r = 0; r < x.n_rows; ++r)
            if (!in_bag[t][r]) ++oob_votes[r][forest.trees[t].vote(x.row(r))];

    std::size_t correct = 0;
    for (std::size_t r = 0; r < x.n_rows; ++r) {
        std::uint32_t total = 0;
        for (std::uint32_t v : oob_votes[r]) total += v;
        std::size_t ever_inbag = 0;
        for (std::size_t t = 0; t < config.n_trees; ++t) ever_inbag += in_bag[t][r];
        if (ever_inbag == config.n_trees) ++result.never_oob;
        if (ever_inbag == 0) ++result.never_inbag;
        if (total == 0) continue;
        ++result.oob_covered;
        std::size_t best = 0;
        for (std::size_t c = 1; c < classes.size(); ++c)
            if (oob_votes[r][c] > oob_votes[r][best]) best = c;
        if (best == y[r]) ++correct;
    }
    result.oob_accuracy = result.oob_covered ? double(correct) / double(result.oob_covered) : 0.0;
    return result;
}

}  // namespace rbd::forest
