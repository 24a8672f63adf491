#pragma once

// Report emission: CSV tables plus self-contained SVG views (confusion
// heatmaps, manual-vs-automatic scatters, importance bars) and a manifest
// listing every artifact with its SHA-256. All rendering is deterministic:
// fixed float formatting, fixed ordering, no timestamps.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rbd/eval.hpp"
#include "rbd/staging.hpp"
#include "rbd/util/io.hpp"
#include "rbd/util/sha256.hpp"
#include "rbd/util/strings.hpp"

namespace rbd::report {

// ---- SVG primitives -------------------------------------------------------

namespace detail {

inline std::string num(double v) { return format_double(v); }

inline std::string svg_header(int width, int height, const std::string& title) {
    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) +
         " " + std::to_string(height) + "\">\n";
    s += "<style>text{font-family:monospace;font-size:12px}</style>\n";
    s += "<text x=\"12\" y=\"18\" font-size=\"14\">" + title + "</text>\n";
    return s;
}

inline std::string rect(double x, double y, double w, double h, const std::string& fill) {
    return "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" +
           num(h) + "\" fill=\"" + fill + "\"/>\n";
}

inline std::string text(double x, double y, const std::string& content,
                        const std::string& extra = "") {
    return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\"" + extra + ">" + content +
           "</text>\n";
}

inline std::string circle(double x, double y, double r, const std::string& fill) {
    return "<circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"" + num(r) + "\" fill=\"" +
           fill + "\"/>\n";
}

inline std::string line(double x1, double y1, double x2, double y2, const std::string& stroke) {
    return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
           num(y2) + "\" stroke=\"" + stroke + "\"/>\n";
}

// blue shade scaled by intensity in [0,1]
inline std::string heat_color(double intensity) {
    const int level = 255 - static_cast<int>(intensity * 200.0);
    return "rgb(" + std::to_string(level) + "," + std::to_string(level) + ",255)";
}

}  // namespace detail

inline std::string svg_confusion(const std::string& title, const staging::Confusion& c) {
    const char* names[5] = {"W", "N1", "N2", "N3", "REM"};
    std::array<double, 5> row_total{};
    for (int t = 0; t < 5; ++t)
        for (int p = 0; p < 5; ++p) row_total[std::size_t(t)] += double(c[t][p]);

    const double cell = 56.0, left = 70.0, top = 50.0;
    std::string s = detail::svg_header(int(left + 5 * cell + 30), int(top + 5 * cell + 40), title);
    for (int t = 0; t < 5; ++t) {
        s += detail::text(16, top + t * cell + cell / 2 + 4, names[t]);
        for (int p = 0; p < 5; ++p) {
            const double frac =
                row_total[std::size_t(t)] > 0 ? double(c[t][p]) / row_total[std::size_t(t)] : 0.0;
            s += detail::rect(left + p * cell, top + t * cell, cell - 2, cell - 2,
                              detail::heat_color(frac));
            s += detail::text(left + p * cell + 6, top + t * cell + cell / 2 + 4,
                              std::to_string(c[t][p]));
        }
    }
    for (int p = 0; p < 5; ++p) s += detail::text(left + p * cell + 16, top - 8, names[p]);
    s += detail::text(16, top + 5 * cell + 24, "rows: annotated, columns: predicted");
    s += "</svg>\n";
    return s;
}

inline std::string svg_scatter(const std::string& title, const std::vector<double>& xs,
                               const std::vector<double>& ys, const std::string& xlabel,
                               const std::string& ylabel) {
    const double size = 320.0, margin = 50.0;
    double lo = 0.0, hi = 1.0;
    for (double v : xs) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double v : ys) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi <= lo) hi = lo + 1.0;
    const double span = hi - lo;
    auto sx = [&](double v) { return margin + (v - lo) / span * size; };
    auto sy = [&](double v) { return margin + size - (v - lo) / span * size; };

    std::string s =
        detail::svg_header(int(size + 2 * margin), int(size + 2 * margin + 20), title);
    s += detail::rect(margin, margin, size, size, "none");
    s += detail::line(margin, margin + size, margin + size, margin + size, "black");
    s += detail::line(margin, margin, margin, margin + size, "black");
    s += detail::line(sx(lo), sy(lo), sx(hi), sy(hi), "#bbbbbb");  // identity diagonal
    for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i)
        s += detail::circle(sx(xs[i]), sy(ys[i]), 3.5, "#3366cc");
    s += detail::text(margin + size / 2 - 30, margin + size + 34, xlabel);
    s += detail::text(14, margin - 10, ylabel);
    s += "</svg>\n";
    return s;
}

inline std::string svg_bars(const std::string& title, const std::vector<std::string>& names,
                            const std::vector<double>& values) {
    const double bar_h = 22.0, left = 150.0, width = 300.0, top = 40.0;
    double peak = 1e-12;
    for (double v : values) peak = std::max(peak, std::fabs(v));
    std::string s = detail::svg_header(int(left + width + 80),
                                       int(top + bar_h * double(names.size()) + 30), title);
    for (std::size_t i = 0; i < names.size(); ++i) {
        const double y = top + double(i) * bar_h;
        const double w = std::max(0.0, values[i]) / peak * width;
        s += detail::text(10, y + 14, names[i]);
        s += detail::rect(left, y + 3, w, bar_h - 8, "#cc6633");
        s += detail::text(left + w + 6, y + 14, detail::num(values[i]));
    }
    s += "</svg>\n";
    return s;
}

// ---- CSV tables -----------------------------------------------------------

inline std::string staging_report_csv(const staging::StageReport& r) {
    const char* stages[5] = {"W", "N1", "N2", "N3", "REM"};
    std::string s = "cohort,n_subjects,kappa\n";
    s += r.cohort + "," + std::to_string(r.n_subjects) + "," + format_double(r.kappa) + "\n\n";
    s += "metric,stage,mean,sd,n\n";
    for (std::size_t metric = 0; metric < 5; ++metric) {
        for (std::size_t stage = 0; stage < 5; ++stage) {
            const auto& m = r.stage_metric[metric][stage];
            s += std::string(staging::kMetricNames[metric]) + "," + stages[stage] + ",";
            if (m.n > 0) s += format_double(m.mean) + "," + format_double(m.sd);
            else s += ",";
            s += "," + std::to_string(m.n) + "\n";
        }
        const auto& mac = r.macro[metric];
        s += std::string(staging::kMetricNames[metric]) + ",macro,";
        if (mac.n > 0) s += format_double(mac.mean) + "," + format_double(mac.sd);
        else s += ",";
        s += "," + std::to_string(mac.n) + "\n";
    }
    return s;
}

inline std::string staging_report_text(const staging::StageReport& r) {
    const char* stages[5] = {"W", "N1", "N2", "N3", "REM"};
    char line[160];
    std::string s;
    std::snprintf(line, sizeof(line), "cohort %s: %zu subjects, %zu scored epochs, kappa %.4f\n",
                  r.cohort.c_str(), r.n_subjects, r.scored_epochs(), r.kappa);
    s += line;
    std::snprintf(line, sizeof(line), "%-12s %10s %10s %10s %10s %10s\n", "metric", "W", "N1",
                  "N2", "N3", "REM");
    s += line;
    for (std::size_t metric = 0; metric < 5; ++metric) {
        std::string row;
        std::snprintf(line, sizeof(line), "%-12s", staging::kMetricNames[metric]);
        row += line;
        for (std::size_t stage = 0; stage < 5; ++stage) {
            const auto& m = r.stage_metric[metric][stage];
            if (m.n > 0) std::snprintf(line, sizeof(line), " %4.2f+-%4.2f", m.mean, m.sd);
            else std::snprintf(line, sizeof(line), " %10s", "-");
            row += line;
        }
        const auto& mac = r.macro[metric];
        if (mac.n > 0) std::snprintf(line, sizeof(line), "   macro %4.2f+-%4.2f\n", mac.mean, mac.sd);
        else std::snprintf(line, sizeof(line), "   macro %s\n", "-");
        row += line;
        s += row;
    }
    s += "confusion (rows annotated, columns predicted):\n";
    std::snprintf(line, sizeof(line), "%6s %8s %8s %8s %8s %8s\n", "", "W", "N1", "N2", "N3",
                  "REM");
    s += line;
    for (int t = 0; t < 5; ++t) {
        std::snprintf(line, sizeof(line), "%6s", stages[t]);
        s += line;
        for (int p = 0; p < 5; ++p) {
            std::snprintf(line, sizeof(line), " %8zu", r.confusion[t][p]);
            s += line;
        }
        s += "\n";
    }
    return s;
}

inline std::string confusion_csv(const staging::Confusion& c) {
    const char* stages[5] = {"W", "N1", "N2", "N3", "REM"};
    std::string s = "truth\\pred,W,N1,N2,N3,REM\n";
    for (int t = 0; t < 5; ++t) {
        s += stages[t];
        for (int p = 0; p < 5; ++p) s += "," + std::to_string(c[t][p]);
        s += "\n";
    }
    return s;
}

inline std::string correlation_csv(const std::vector<eval::CorrelationRow>& rows) {
    std::string s = "metric,pearson_r,n\n";
    for (const auto& r : rows) {
        s += r.metric + ",";
        if (r.r) s += format_double(*r.r);
        s += "," + std::to_string(r.n) + "\n";
    }
    return s;
}

inline std::string detection_csv(const std::vector<eval::DetectionRow>& rows) {
    std::string s = "classifier,staging,accuracy,sensitivity,specificity,n\n";
    for (const auto& r : rows)
        s += r.classifier + "," + r.staging + "," + format_double(r.accuracy) + "," +
             format_double(r.sensitivity) + "," + format_double(r.specificity) + "," +
             std::to_string(r.n) + "\n";
    return s;
}

inline std::string importance_csv(const std::vector<eval::ImportanceRow>& rows) {
    std::string s = "feature,delta_error\n";
    for (const auto& r : rows) s += r.feature + "," + format_double(r.delta_error) + "\n";
    return s;
}

// ---- artifact collection and manifest --------------------------------------

class ReportWriter {
  public:
    explicit ReportWriter(std::filesystem::path root) : root_(std::move(root)) {}

    void add(const std::string& relative_path, const std::string& content) {
        write_file(root_ / relative_path, content);
        entries_[relative_path] = {content.size(), Sha256::hex(content)};
    }

    // one line per artifact, sorted by path; hashing the hashes makes run
    // equality a single file comparison
    std::string finalize() {
        std::string manifest = "path,bytes,sha256\n";
        for (const auto& [path, meta] : entries_)
            manifest += path + "," + std::to_string(meta.first) + "," + meta.second + "\n";
        write_file(root_ / "MANIFEST.csv", manifest);
        return manifest;
    }

    const std::filesystem::path& root() const { return root_; }

  private:
    std::filesystem::path root_;
    std::map<std::string, std::pair<std::size_t, std::string>> entries_;
};

}  // namespace rbd::report
