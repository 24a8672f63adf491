#pragma once

// Versioned, self-describing model files (JSON): classes, schema hash,
// seed, tree topology and leaf counts. nlohmann orders keys, and doubles
// round-trip exactly, so serialization is byte-deterministic.

#include <string>
#include <vector>

#include "json.hpp"
#include "rbd/errors.hpp"
#include "rbd/forest/forest.hpp"
#include "rbd/util/strings.hpp"

namespace rbd::forest {

inline constexpr int kModelFormatVersion = 1;

inline std::string to_json(const TrainedForest& f) {
    nlohmann::json doc;
    doc["format"] = "rbd-forest";
    doc["version"] = kModelFormatVersion;
    doc["classes"] = f.classes;
    doc["schema_hash"] = hex_u64(f.schema_hash);
    doc["seed"] = f.seed;
    doc["n_features"] = f.n_features;
    doc["m_try"] = f.m_try;
    doc["min_leaf"] = f.min_leaf;
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : f.trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& n : tree.nodes) {
            nlohmann::json node;
            node["f"] = n.feature;
            if (n.feature >= 0) {
                node["t"] = n.threshold;
                node["l"] = n.left;
                node["r"] = n.right;
            } else {
                node["c"] = n.counts;
            }
            nodes.push_back(std::move(node));
        }
        trees.push_back(std::move(nodes));
    }
    doc["trees"] = std::move(trees);
    return doc.dump();
}

inline TrainedForest from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        if (doc.at("format") != "rbd-forest") throw ParseError("not a forest model file");
        if (doc.at("version").get<int>() != kModelFormatVersion)
            throw ParseError("unsupported model version");
        TrainedForest f;
        f.classes = doc.at("classes").get<std::vector<std::string>>();
        f.schema_hash = std::stoull(doc.at("schema_hash").get<std::string>(), nullptr, 16);
        f.seed = doc.at("seed").get<std::uint64_t>();
        f.n_features = doc.at("n_features").get<std::size_t>();
        f.m_try = doc.at("m_try").get<std::size_t>();
        f.min_leaf = doc.at("min_leaf").get<std::size_t>();
        for (const auto& tree_doc : doc.at("trees")) {
            Tree tree;
            for (const auto& node_doc : tree_doc) {
                TreeNode n;
                n.feature = node_doc.at("f").get<std::int32_t>();
                if (n.feature >= 0) {
                    n.threshold = node_doc.at("t").get<double>();
                    n.left = node_doc.at("l").get<std::int32_t>();
                    n.right = node_doc.at("r").get<std::int32_t>();
                    if (n.feature >= std::int32_t(f.n_features))
                        throw ParseError("node feature index out of range");
                } else {
                    n.counts = node_doc.at("c").get<std::vector<std::uint32_t>>();
                    if (n.counts.size() != f.classes.size())
                        throw ParseError("leaf class count size mismatch");
                }
                tree.nodes.push_back(std::move(n));
            }
            if (tree.nodes.empty()) throw ParseError("empty tree in model file");
            f.trees.push_back(std::move(tree));
        }
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed forest model: ") + e.what());
    }
}

}  // namespace rbd::forest
