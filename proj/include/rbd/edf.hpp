#pragma once

// EDF reader/writer for the published field layout: 256-byte fixed header,
// 256 bytes of header per signal, then data records of little-endian int16
// samples. Samples are converted to physical units with the digital/physical
// min-max scaling; the scaling metadata is kept on each Channel so writing a
// parsed recording back produces bit-identical digital samples.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "rbd/errors.hpp"
#include "rbd/types.hpp"
#include "rbd/util/strings.hpp"

namespace rbd::edf {

namespace detail {

inline std::string field(std::span<const std::uint8_t> bytes, std::size_t offset, std::size_t len) {
    if (offset + len > bytes.size())
        throw ParseError("EDF header truncated", static_cast<long long>(bytes.size()));
    return std::string(reinterpret_cast<const char*>(bytes.data() + offset), len);
}

inline double num_field(std::span<const std::uint8_t> bytes, std::size_t offset, std::size_t len,
                        const std::string& what) {
    try {
        return parse_double(field(bytes, offset, len), what);
    } catch (const ParseError& e) {
        throw ParseError(e.what(), static_cast<long long>(offset));
    }
}

inline long long int_field(std::span<const std::uint8_t> bytes, std::size_t offset, std::size_t len,
                           const std::string& what) {
    try {
        return parse_int(field(bytes, offset, len), what);
    } catch (const ParseError& e) {
        throw ParseError(e.what(), static_cast<long long>(offset));
    }
}

// Fixed-width ASCII field, left-justified, space padded.
inline void put(std::string& out, std::string_view value, std::size_t width) {
    std::string v(value.substr(0, width));
    v.resize(width, ' ');
    out += v;
}

inline void put_int(std::string& out, long long value, std::size_t width) {
    put(out, std::to_string(value), width);
}

// Shortest representation of v that fits `width` chars and is parse-exact
// when possible (precision is only reduced when the value cannot fit).
inline std::string num_text(double v, std::size_t width) {
    for (int prec = 8; prec >= 1; --prec) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::string(buf).size() <= width) return buf;
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.0e", v);
    return std::string(buf).substr(0, width);
}

}  // namespace detail

inline Recording parse(std::span<const std::uint8_t> bytes) {
    using namespace detail;
    if (bytes.size() < 256) throw ParseError("EDF shorter than fixed header", 0);

    Recording rec;
    const std::string version = trim(field(bytes, 0, 8));
    if (version != "0") throw ParseError("unsupported EDF version '" + version + "'", 0);
    rec.patient_id = trim(field(bytes, 8, 80));
    rec.recording_id = trim(field(bytes, 88, 80));
    rec.start_date = trim(field(bytes, 168, 8));
    rec.start_time = trim(field(bytes, 176, 8));
    const long long header_bytes = int_field(bytes, 184, 8, "header byte count");
    rec.n_records = int_field(bytes, 236, 8, "record count");
    rec.record_duration = num_field(bytes, 244, 8, "record duration");
    const long long ns = int_field(bytes, 252, 4, "signal count");

    if (ns < 1) throw ParseError("EDF with no signals", 252);
    if (rec.n_records < 0) throw ParseError("unknown record count (-1) not supported", 236);
    if (rec.record_duration <= 0.0) throw ParseError("non-positive record duration", 244);
    if (header_bytes != 256 * (ns + 1))
        throw ParseError("header byte count " + std::to_string(header_bytes) +
                             " inconsistent with " + std::to_string(ns) + " signals",
                         184);
    if (bytes.size() < static_cast<std::size_t>(header_bytes))
        throw ParseError("EDF truncated inside signal headers", static_cast<long long>(bytes.size()));

    const auto n = static_cast<std::size_t>(ns);
    rec.channels.resize(n);
    std::size_t off = 256;
    for (std::size_t i = 0; i < n; ++i) rec.channels[i].label = trim(field(bytes, off + 16 * i, 16));
    off += 16 * n;
    for (std::size_t i = 0; i < n; ++i) rec.channels[i].transducer = trim(field(bytes, off + 80 * i, 80));
    off += 80 * n;
    for (std::size_t i = 0; i < n; ++i) rec.channels[i].unit = trim(field(bytes, off + 8 * i, 8));
    off += 8 * n;
    for (std::size_t i = 0; i < n; ++i)
        rec.channels[i].phys_min = num_field(bytes, off + 8 * i, 8, "physical minimum");
    off += 8 * n;
    for (std::size_t i = 0; i < n; ++i)
        rec.channels[i].phys_max = num_field(bytes, off + 8 * i, 8, "physical maximum");
    off += 8 * n;
    for (std::size_t i = 0; i < n; ++i)
        rec.channels[i].dig_min = static_cast<int>(int_field(bytes, off + 8 * i, 8, "digital minimum"));
    off += 8 * n;
    for (std::size_t i = 0; i < n; ++i)
        rec.channels[i].dig_max = static_cast<int>(int_field(bytes, off + 8 * i, 8, "digital maximum"));
    off += 8 * n;
    for (std::size_t i = 0; i < n; ++i) rec.channels[i].prefilter = trim(field(bytes, off + 80 * i, 80));
    off += 80 * n;
    for (std::size_t i = 0; i < n; ++i)
        rec.channels[i].samples_per_record = int_field(bytes, off + 8 * i, 8, "samples per record");
    off += 8 * n;
    off += 32 * n;  // per-signal reserved

    long long record_samples = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = rec.channels[i];
        if (c.samples_per_record < 1)
            throw ParseError("signal " + std::to_string(i) + " has no samples per record");
        if (c.dig_min == c.dig_max)
            throw ParseError("signal " + std::to_string(i) + " has degenerate digital range");
        record_samples += c.samples_per_record;
    }

    const std::size_t expected = static_cast<std::size_t>(header_bytes) +
                                 static_cast<std::size_t>(rec.n_records) *
                                     static_cast<std::size_t>(record_samples) * 2;
    if (bytes.size() < expected)
        throw ParseError("EDF data truncated: header promises " + std::to_string(expected) +
                             " bytes, file has " + std::to_string(bytes.size()),
                         static_cast<long long>(bytes.size()));
    if (bytes.size() > expected)
        throw ParseError("EDF has " + std::to_string(bytes.size() - expected) +
                             " trailing bytes beyond the declared records",
                         static_cast<long long>(expected));

    for (auto& c : rec.channels)
        c.samples.reserve(static_cast<std::size_t>(c.samples_per_record * rec.n_records));

    const std::uint8_t* p = bytes.data() + header_bytes;
    for (long long r = 0; r < rec.n_records; ++r) {
        for (auto& c : rec.channels) {
            const double gain = (c.phys_max - c.phys_min) / double(c.dig_max - c.dig_min);
            for (long long s = 0; s < c.samples_per_record; ++s) {
                const auto raw = static_cast<std::int16_t>(std::uint16_t(p[0]) | (std::uint16_t(p[1]) << 8));
                p += 2;
                c.samples.push_back(c.phys_min + (double(raw) - double(c.dig_min)) * gain);
            }
        }
    }
    return rec;
}

inline Recording parse(const std::vector<std::uint8_t>& bytes) {
    return parse(std::span<const std::uint8_t>(bytes.data(), bytes.size()));
}

inline std::vector<std::uint8_t> write(const Recording& rec) {
    using namespace detail;
    if (rec.channels.empty()) throw ArgumentError("cannot write EDF with no channels");
    for (const auto& c : rec.channels) {
        if (c.samples_per_record < 1) throw ArgumentError("channel without samples_per_record");
        if (c.dig_min == c.dig_max) throw ArgumentError("degenerate digital range");
        if (static_cast<long long>(c.samples.size()) != c.samples_per_record * rec.n_records)
            throw ArgumentError("channel '" + c.label + "' sample count does not match record grid");
    }

    const std::size_t n = rec.channels.size();
    std::string h;
    h.reserve(256 * (n + 1));
    put(h, "0", 8);
    put(h, rec.patient_id, 80);
    put(h, rec.recording_id, 80);
    put(h, rec.start_date, 8);
    put(h, rec.start_time, 8);
    put_int(h, static_cast<long long>(256 * (n + 1)), 8);
    put(h, "", 44);
    put_int(h, rec.n_records, 8);
    put(h, num_text(rec.record_duration, 8), 8);
    put_int(h, static_cast<long long>(n), 4);
    for (const auto& c : rec.channels) put(h, c.label, 16);
    for (const auto& c : rec.channels) put(h, c.transducer, 80);
    for (const auto& c : rec.channels) put(h, c.unit, 8);
    for (const auto& c : rec.channels) put(h, num_text(c.phys_min, 8), 8);
    for (const auto& c : rec.channels) put(h, num_text(c.phys_max, 8), 8);
    for (const auto& c : rec.channels) put_int(h, c.dig_min, 8);
    for (const auto& c : rec.channels) put_int(h, c.dig_max, 8);
    for (const auto& c : rec.channels) put(h, c.prefilter, 80);
    for (const auto& c : rec.channels) put_int(h, c.samples_per_record, 8);
    for (std::size_t i = 0; i < n; ++i) put(h, "", 32);

    std::vector<std::uint8_t> out(h.begin(), h.end());
    long long record_samples = 0;
    for (const auto& c : rec.channels) record_samples += c.samples_per_record;
    out.reserve(out.size() + static_cast<std::size_t>(rec.n_records * record_samples * 2));

    for (long long r = 0; r < rec.n_records; ++r) {
        for (const auto& c : rec.channels) {
            const double gain = (c.phys_max - c.phys_min) / double(c.dig_max - c.dig_min);
            for (long long s = 0; s < c.samples_per_record; ++s) {
                const double phys = c.samples[static_cast<std::size_t>(r * c.samples_per_record + s)];
                double d = double(c.dig_min);
                if (gain != 0.0) d += (phys - c.phys_min) / gain;
                const auto q = static_cast<long long>(std::llround(d));
                const auto clamped = std::clamp<long long>(q, c.dig_min, c.dig_max);
                const auto raw = static_cast<std::int16_t>(clamped);
                out.push_back(static_cast<std::uint8_t>(raw & 0xff));
                out.push_back(static_cast<std::uint8_t>((raw >> 8) & 0xff));
            }
        }
    }
    return out;
}

// Builds a writable channel from physical samples: digital range is the full
// int16 span and the physical range is a short, parse-exact bound on the
// data, so round-tripping through the 8-char ASCII scaling fields is lossless.
inline Channel make_channel(std::string label, std::string unit, std::vector<double> samples,
                            long long samples_per_record) {
    double peak = 1.0;
    for (double v : samples) peak = std::max(peak, std::fabs(v));
    // snap to 3 significant digits, rounding away from zero
    double scale = std::pow(10.0, std::floor(std::log10(peak)) - 2.0);
    peak = std::ceil(peak / scale) * scale;

    Channel c;
    c.label = std::move(label);
    c.unit = std::move(unit);
    c.phys_min = -peak;
    c.phys_max = peak;
    c.dig_min = -32767;
    c.dig_max = 32767;
    c.samples_per_record = samples_per_record;
    c.samples = std::move(samples);
    return c;
}

}  // namespace rbd::edf
