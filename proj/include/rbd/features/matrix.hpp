#pragma once

// Per-epoch feature matrix with CSV and versioned binary persistence. Both
// formats embed the schema hash.

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "rbd/errors.hpp"
#include "rbd/features/schema.hpp"
#include "rbd/util/strings.hpp"

namespace rbd::features {

struct FeatureMatrix {
    FeatureSchema schema;
    std::string subject_id;
    std::string staging_source = "none";  // manual | automatic | none
    std::vector<double> values;           // row-major, n_rows x schema.size()

    std::size_t n_rows() const { return schema.size() == 0 ? 0 : values.size() / schema.size(); }

    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(values).subspan(i * schema.size(), schema.size());
    }

    double at(std::size_t i, std::size_t j) const { return values[i * schema.size() + j]; }

    void append_row(std::span<const double> row_values) {
        if (row_values.size() != schema.size())
            throw SchemaError("row length " + std::to_string(row_values.size()) +
                              " does not match schema size " + std::to_string(schema.size()));
        values.insert(values.end(), row_values.begin(), row_values.end());
    }
};

inline std::string to_csv(const FeatureMatrix& m) {
    std::string out;
    out += "# schema_hash=" + hex_u64(m.schema.hash()) + " subject=" + m.subject_id +
           " staging_source=" + m.staging_source + "\n";
    for (std::size_t j = 0; j < m.schema.size(); ++j) {
        if (j) out += ',';
        out += m.schema.names[j];
    }
    out += '\n';
    for (std::size_t i = 0; i < m.n_rows(); ++i) {
        const auto r = m.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (j) out += ',';
            out += format_double(r[j]);
        }
        out += '\n';
    }
    return out;
}

namespace detail {

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_string(std::vector<std::uint8_t>& out, const std::string& s) {
    put_u64(out, s.size());
    out.insert(out.end(), s.begin(), s.end());
}

struct Reader {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;

    std::uint64_t u64() {
        if (pos + 8 > bytes.size()) throw ParseError("feature matrix truncated", (long long)pos);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(bytes[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }

    std::string str() {
        const std::uint64_t len = u64();
        if (pos + len > bytes.size()) throw ParseError("feature matrix truncated", (long long)pos);
        std::string s(reinterpret_cast<const char*>(bytes.data() + pos), len);
        pos += len;
        return s;
    }

    double f64() {
        std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
};

}  // namespace detail

inline constexpr char kMatrixMagic[8] = {'R', 'B', 'D', 'F', 'M', 'A', 'T', '1'};

inline std::vector<std::uint8_t> to_binary(const FeatureMatrix& m) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMatrixMagic, kMatrixMagic + 8);
    detail::put_u64(out, m.schema.hash());
    detail::put_string(out, m.subject_id);
    detail::put_string(out, m.staging_source);
    detail::put_u64(out, m.schema.size());
    for (const auto& name : m.schema.names) detail::put_string(out, name);
    detail::put_u64(out, m.n_rows());
    for (double v : m.values) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        detail::put_u64(out, bits);
    }
    return out;
}

inline FeatureMatrix from_binary(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMatrixMagic, 8) != 0)
        throw ParseError("not a feature matrix file", 0);
    detail::Reader r{bytes, 8};
    const std::uint64_t stored_hash = r.u64();
    FeatureMatrix m;
    m.subject_id = r.str();
    m.staging_source = r.str();
    const std::uint64_t n_features = r.u64();
    m.schema.names.reserve(n_features);
    for (std::uint64_t j = 0; j < n_features; ++j) m.schema.names.push_back(r.str());
    if (m.schema.hash() != stored_hash) throw ParseError("feature matrix schema hash mismatch");
    const std::uint64_t n_rows = r.u64();
    m.values.reserve(n_rows * n_features);
    for (std::uint64_t i = 0; i < n_rows * n_features; ++i) m.values.push_back(r.f64());
    return m;
}

}  // namespace rbd::features
