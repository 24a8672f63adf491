#pragma once

// SubjectMetrics table persistence: one CSV row per subject per staging
// source; missing metrics stay as empty fields.

#include <string>
#include <vector>

#include "rbd/errors.hpp"
#include "rbd/rswa.hpp"
#include "rbd/util/strings.hpp"

namespace rbd::rswa {

inline std::string metrics_csv_header() {
    std::string h = "subject_id,cohort,staging_source";
    for (const auto& name : kMetricNames) h += "," + name;
    return h;
}

inline std::string to_csv_row(const SubjectMetrics& m) {
    std::string row = m.subject_id + "," + m.cohort + "," + m.staging_source;
    for (const auto& name : kMetricNames) {
        row += ',';
        const auto v = metric_by_name(m, name);
        if (v) row += format_double(*v);
    }
    return row;
}

inline std::string to_csv(const std::vector<SubjectMetrics>& list) {
    std::string out = metrics_csv_header() + "\n";
    for (const auto& m : list) out += to_csv_row(m) + "\n";
    return out;
}

inline std::vector<SubjectMetrics> from_csv(const std::string& text) {
    const auto lines = split(text, '\n');
    if (lines.empty() || trim(lines[0]) != metrics_csv_header())
        throw ParseError("unrecognized subject-metrics CSV header");
    std::vector<SubjectMetrics> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string line = trim(lines[i]);
        if (line.empty()) continue;
        const auto parts = split(line, ',');
        if (parts.size() != 3 + kMetricNames.size())
            throw ParseError("bad metrics CSV row " + std::to_string(i));
        SubjectMetrics m;
        m.subject_id = parts[0];
        m.cohort = parts[1];
        m.staging_source = parts[2];
        auto set = [&](std::size_t idx, std::optional<double>& field) {
            const std::string v = trim(parts[3 + idx]);
            if (!v.empty()) field = parse_double(v, kMetricNames[idx]);
        };
        set(0, m.atonia_index_rem);
        set(1, m.stream);
        set(2, m.motor_activity);
        set(3, m.ai_ratio_n2);
        set(4, m.ai_ratio_n3);
        set(5, m.fe_ratio_n2);
        set(6, m.fe_ratio_n3);
        set(7, m.n3_ratio);
        set(8, m.sleep_efficiency);
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace rbd::rswa
