#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rbd/errors.hpp"
#include "rbd/util/strings.hpp"

namespace rbd::features {

// Ordered, named feature layout. The hash travels with every matrix and
// model so schema drift is caught instead of silently misaligning columns.
struct FeatureSchema {
    std::vector<std::string> names;

    std::size_t size() const { return names.size(); }

    std::uint64_t hash() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (const auto& name : names) {
            h = fnv1a(name, h);
            h = fnv1a("\n", h);
        }
        return h;
    }

    int index_of(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return static_cast<int>(i);
        return -1;
    }

    void require_match(const FeatureSchema& other, const std::string& context) const {
        if (hash() != other.hash())
            throw SchemaError("feature schema mismatch in " + context + ": " + hex_u64(hash()) +
                              " vs " + hex_u64(other.hash()));
    }
};

}  // namespace rbd::features
