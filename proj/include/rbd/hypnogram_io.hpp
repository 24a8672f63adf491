#pragma once

// Hypnogram sidecar files: `# epoch_len=30` header, then one `epoch,stage`
// line per epoch. Stages may be AASM (W,N1,N2,N3,REM,UNSCORED) or R&K
// (S0..S4,REM); parsing normalizes everything to AASM.

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "rbd/errors.hpp"
#include "rbd/types.hpp"
#include "rbd/util/strings.hpp"

namespace rbd {

struct SidecarHypnogram {
    Hypnogram hypnogram;
    std::string source = "manual";  // from an optional `# source=` line
    std::size_t unknown_labels = 0;
};

inline SidecarHypnogram parse_hypnogram_sidecar(const std::string& text) {
    SidecarHypnogram out;
    double epoch_len = 30.0;
    std::vector<std::pair<long long, Stage>> rows;
    long long line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto body = trim(line.substr(1));
            const auto eq = body.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = trim(body.substr(0, eq));
            const std::string value = trim(body.substr(eq + 1));
            if (key == "epoch_len") epoch_len = parse_double(value, "epoch_len");
            else if (key == "source") out.source = value;
            continue;
        }
        const auto parts = split(line, ',');
        if (parts.size() != 2)
            throw ParseError("hypnogram line " + std::to_string(line_no) + ": expected 'epoch,stage'");
        const long long idx = parse_int(parts[0], "epoch index");
        if (idx < 0) throw ParseError("hypnogram line " + std::to_string(line_no) + ": negative epoch");
        rows.emplace_back(idx, stage_from_label(parts[1], &out.unknown_labels));
    }
    if (epoch_len != 30.0) throw ParseError("unsupported epoch_len (must be 30)");
    long long max_idx = -1;
    for (const auto& [idx, stage] : rows) max_idx = std::max(max_idx, idx);
    out.hypnogram.epoch_len = epoch_len;
    out.hypnogram.stages.assign(static_cast<std::size_t>(max_idx + 1), Stage::Unscored);
    for (const auto& [idx, stage] : rows) out.hypnogram.stages[static_cast<std::size_t>(idx)] = stage;
    return out;
}

inline std::string format_hypnogram_sidecar(const Hypnogram& h, const std::string& source = "manual") {
    std::string out = "# epoch_len=30\n# source=" + source + "\n";
    for (std::size_t i = 0; i < h.stages.size(); ++i) {
        out += std::to_string(i);
        out += ',';
        out += stage_name(h.stages[i]);
        out += '\n';
    }
    return out;
}

}  // namespace rbd
