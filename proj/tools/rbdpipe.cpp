// rbdpipe: polysomnography pipeline for automated RBD screening.
// Subcommands cover the full flow (synth -> ingest -> pipeline) plus thin
// bindings to the individual stages. Exit codes: 0 success, 1 data error,
// 2 configuration error, 3 internal invariant failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rbd/config.hpp"
#include "rbd/detect.hpp"
#include "rbd/eval.hpp"
#include "rbd/forest/serialize.hpp"
#include "rbd/pipeline.hpp"
#include "rbd/report.hpp"
#include "rbd/rswa_csv.hpp"
#include "rbd/store.hpp"
#include "rbd/util/io.hpp"

namespace fs = std::filesystem;
using namespace rbd;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    long long seed = -1;
    unsigned jobs = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "configuration file (key=value lines)");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "override every stage seed with this base value");
    cmd->add_option("--jobs", opts.jobs, "worker threads (0 = hardware)");
}

RunConfig load_config(const CommonOpts& opts) {
    RunConfig cfg;
    if (!opts.config_path.empty()) {
        if (!fs::exists(opts.config_path))
            throw ConfigError("config file does not exist: " + opts.config_path);
        cfg = parse_config(read_text_file(opts.config_path));
    }
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    if (opts.jobs != 0) cfg.jobs = opts.jobs;
    if (opts.seed >= 0) {
        const auto base = static_cast<std::uint64_t>(opts.seed);
        cfg.staging_seed = base + 1;
        cfg.detect_seed = base + 2;
        cfg.fold_seed = base + 3;
        cfg.synth_seed = base + 4;
    }
    return cfg;
}

std::vector<store::StoredSubject> must_load_store(const RunConfig& cfg) {
    validate_paths(cfg, false, true);
    return store::load_store(cfg.store_dir);
}

int run_synth(const CommonOpts& opts) {
    RunConfig cfg = load_config(opts);
    if (cfg.out_dir.empty()) throw ConfigError("synth needs --out or out.dir");
    const auto manifest = pipeline::run_synth(cfg, cfg.out_dir);
    std::printf("synth: %zu subjects, manifest %s\n", cfg.synth_n_hc + cfg.synth_n_rbd,
                manifest.string().c_str());
    return 0;
}

int run_ingest(const CommonOpts& opts, const std::string& manifest_path,
               const std::string& store_dir) {
    RunConfig cfg = load_config(opts);
    if (!manifest_path.empty()) cfg.dataset_manifest = manifest_path;
    if (!store_dir.empty()) cfg.store_dir = store_dir;
    validate_paths(cfg, true, false);
    if (cfg.store_dir.empty()) throw ConfigError("ingest needs --store or store.dir");

    const auto entries = store::parse_manifest(read_text_file(cfg.dataset_manifest));
    if (entries.empty()) {
        std::fprintf(stderr, "ingest: no subjects in manifest\n");
        return 1;
    }
    const auto result = store::ingest(entries, cfg.store_dir, cfg);
    write_file(fs::path(cfg.store_dir) / "quality.csv", store::quality_csv(result.quality));
    std::printf("ingest: %zu stored, %zu failed\n", result.stored.size(), result.errors.size());
    for (const auto& e : result.errors) std::fprintf(stderr, "  error: %s\n", e.c_str());
    return result.errors.empty() ? 0 : 1;
}

int run_extract(const CommonOpts& opts) {
    RunConfig cfg = load_config(opts);
    const auto stored = must_load_store(cfg);
    const fs::path out(cfg.out_dir);
    std::vector<std::size_t> imputed(stored.size(), 0);
    parallel_for(stored.size(), cfg.effective_jobs(), [&](std::size_t i) {
        const auto s = pipeline::extract_subject(stored[i], cfg, 1);
        write_file(out / "features" / (s.stored.subject_id + ".fmat"),
                   features::to_binary(s.matrix));
        write_file(out / "features" / (s.stored.subject_id + ".csv"), features::to_csv(s.matrix));
        imputed[i] = s.imputed_values;
    });
    std::string quality = "subject_id,imputed_values\n";
    for (std::size_t i = 0; i < stored.size(); ++i)
        quality += stored[i].subject_id + "," + std::to_string(imputed[i]) + "\n";
    write_file(out / "features" / "quality.csv", quality);
    std::printf("extract: %zu subjects -> %s\n", stored.size(), (out / "features").c_str());
    return 0;
}

int run_stage(const CommonOpts& opts, const std::string& features_dir) {
    RunConfig cfg = load_config(opts);
    const auto stored = must_load_store(cfg);
    const fs::path feat_dir =
        features_dir.empty() ? fs::path(cfg.out_dir) / "features" : fs::path(features_dir);
    const fs::path out(cfg.out_dir);

    std::vector<staging::CvSubject> dataset;
    for (const auto& s : stored) {
        staging::CvSubject cv;
        cv.subject_id = s.subject_id;
        cv.cohort = s.cohort;
        cv.features = features::from_binary(read_file(feat_dir / (s.subject_id + ".fmat")));
        cv.manual = parse_hypnogram_sidecar(read_text_file(s.hyp_path)).hypnogram;
        cv.manual.stages.resize(cv.features.n_rows(), Stage::Unscored);
        dataset.push_back(std::move(cv));
    }
    staging::CvConfig cv_cfg;
    cv_cfg.k = cfg.folds;
    cv_cfg.fold_seed = cfg.fold_seed;
    cv_cfg.train.n_trees = cfg.staging_n_trees;
    cv_cfg.train.seed = cfg.staging_seed;
    cv_cfg.jobs = cfg.effective_jobs();
    const auto result = staging::run_cv(dataset, cv_cfg);
    for (const auto& [id, hyp] : result.predicted)
        write_file(out / "staging" / (id + ".hyp"), format_hypnogram_sidecar(hyp, "automatic"));
    write_file(out / "staging" / "report_combined.csv",
               report::staging_report_csv(result.combined));
    write_file(out / "staging" / "report_combined.txt",
               report::staging_report_text(result.combined));
    for (const auto& r : result.per_cohort) {
        write_file(out / "staging" / ("report_" + r.cohort + ".csv"),
                   report::staging_report_csv(r));
        write_file(out / "staging" / ("report_" + r.cohort + ".txt"),
                   report::staging_report_text(r));
    }
    std::printf("stage: combined kappa %.4f over %zu subjects\n", result.combined.kappa,
                dataset.size());
    return 0;
}

int run_metrics(const CommonOpts& opts, const std::string& staging_dir) {
    RunConfig cfg = load_config(opts);
    const auto stored = must_load_store(cfg);
    const fs::path out(cfg.out_dir);
    const fs::path stage_dir =
        staging_dir.empty() ? fs::path(cfg.out_dir) / "staging" : fs::path(staging_dir);

    std::vector<rswa::SubjectMetrics> rows(2 * stored.size());
    parallel_for(stored.size(), cfg.effective_jobs(), [&](std::size_t i) {
        const auto& s = stored[i];
        const Signal emg = pipeline::load_filtered_emg(s, cfg);
        const auto manual = parse_hypnogram_sidecar(read_text_file(s.hyp_path)).hypnogram;
        rows[2 * i] = rswa::assemble(s.subject_id, s.cohort, emg, manual, "manual", cfg.metrics);
        const auto auto_path = stage_dir / (s.subject_id + ".hyp");
        if (fs::exists(auto_path)) {
            const auto autom = parse_hypnogram_sidecar(read_text_file(auto_path)).hypnogram;
            rows[2 * i + 1] =
                rswa::assemble(s.subject_id, s.cohort, emg, autom, "automatic", cfg.metrics);
        } else {
            rows[2 * i + 1].subject_id = "";  // no automatic arm available
        }
    });
    std::vector<rswa::SubjectMetrics> kept;
    for (auto& r : rows)
        if (!r.subject_id.empty()) kept.push_back(std::move(r));
    write_file(out / "metrics" / "subject_metrics.csv", rswa::to_csv(kept));
    std::printf("metrics: %zu rows -> %s\n", kept.size(),
                (out / "metrics" / "subject_metrics.csv").c_str());
    return 0;
}

int run_detect(const CommonOpts& opts, const std::string& metrics_csv) {
    RunConfig cfg = load_config(opts);
    const fs::path csv_path = metrics_csv.empty()
                                  ? fs::path(cfg.out_dir) / "metrics" / "subject_metrics.csv"
                                  : fs::path(metrics_csv);
    if (!fs::exists(csv_path)) throw ConfigError("metrics CSV not found: " + csv_path.string());
    const auto all = rswa::from_csv(read_text_file(csv_path));
    std::map<std::string, std::vector<rswa::SubjectMetrics>> by_arm;
    for (const auto& m : all)
        if (m.complete()) by_arm[m.staging_source].push_back(m);
    if (!by_arm.count("manual")) throw ArgumentError("no complete manual-arm metrics");

    std::vector<std::string> ids, cohorts;
    for (const auto& m : by_arm["manual"]) {
        ids.push_back(m.subject_id);
        cohorts.push_back(m.cohort);
    }
    const auto plan = forest::make_folds(ids, cohorts, cfg.folds, cfg.fold_seed + 1);
    eval::DetectionCvConfig dc;
    dc.k = cfg.folds;
    dc.train_seed = cfg.detect_seed;
    dc.n_trees = cfg.detect_n_trees;
    dc.jobs = cfg.effective_jobs();

    std::vector<eval::DetectionRow> table;
    for (const auto& [arm, metrics] : by_arm) {
        std::vector<rswa::SubjectMetrics> in;
        for (const auto& m : metrics)
            if (plan.assignment.count(m.subject_id)) in.push_back(m);
        const auto arm_rows = eval::detection_cv(in, arm, plan, dc);
        table.insert(table.end(), arm_rows.begin(), arm_rows.end());
    }
    const fs::path out(cfg.out_dir);
    write_file(out / "detection" / "table.csv", report::detection_csv(table));

    for (auto variant : {detect::Variant::Established, detect::Variant::Additional}) {
        const auto f = detect::train_detector(by_arm["manual"], cohorts, variant, cfg.detect_seed,
                                              cfg.detect_n_trees, cfg.effective_jobs());
        const char* name = variant == detect::Variant::Established ? "established" : "additional";
        write_file(out / "detection" / "models" / (std::string(name) + ".json"),
                   forest::to_json(f));
    }
    const auto importance =
        eval::detector_importance(by_arm["manual"], cfg.detect_seed + 17, cfg.detect_n_trees,
                                  cfg.importance_repetitions, cfg.effective_jobs());
    write_file(out / "detection" / "importance.csv", report::importance_csv(importance));
    std::printf("detect: %zu table rows -> %s\n", table.size(),
                (out / "detection" / "table.csv").c_str());
    return 0;
}

int run_evaluate(const CommonOpts& opts, const std::string& metrics_csv) {
    RunConfig cfg = load_config(opts);
    const fs::path csv_path = metrics_csv.empty()
                                  ? fs::path(cfg.out_dir) / "metrics" / "subject_metrics.csv"
                                  : fs::path(metrics_csv);
    if (!fs::exists(csv_path)) throw ConfigError("metrics CSV not found: " + csv_path.string());
    const auto all = rswa::from_csv(read_text_file(csv_path));
    std::vector<rswa::SubjectMetrics> manual, autom;
    for (const auto& m : all)
        (m.staging_source == "manual" ? manual : autom).push_back(m);
    const auto rows = eval::metric_correlation(manual, autom);
    write_file(fs::path(cfg.out_dir) / "metrics" / "correlation.csv",
               report::correlation_csv(rows));
    for (const auto& r : rows)
        std::printf("evaluate: %-18s r=%s (n=%zu)\n", r.metric.c_str(),
                    r.r ? format_double(*r.r).c_str() : "n/a", r.n);
    return 0;
}

int run_full_pipeline(const CommonOpts& opts) {
    RunConfig cfg = load_config(opts);
    validate_paths(cfg, false, true);
    const auto result = pipeline::run_pipeline(cfg);
    std::printf("pipeline: combined kappa %.4f\n", result.staging_cv.combined.kappa);
    for (const auto& row : result.detection)
        std::printf("pipeline: %-15s %-9s acc=%.3f sens=%.3f spec=%.3f\n", row.classifier.c_str(),
                    row.staging.c_str(), row.accuracy, row.sensitivity, row.specificity);
    if (!result.flagged.empty())
        for (const auto& f : result.flagged)
            std::fprintf(stderr, "pipeline: flagged %s\n", f.c_str());
    std::printf("pipeline: report at %s\n",
                (fs::path(cfg.out_dir) / "report" / "MANIFEST.csv").c_str());
    return 0;
}

int run_inspect(const std::string& model_path) {
    const auto f = forest::from_json(read_text_file(model_path));
    std::printf("model: %zu trees, %zu features, m_try=%zu, min_leaf=%zu, seed=%llu\n",
                f.trees.size(), f.n_features, f.m_try, f.min_leaf,
                static_cast<unsigned long long>(f.seed));
    std::printf("classes:");
    for (const auto& c : f.classes) std::printf(" %s", c.c_str());
    std::printf("\nschema_hash: %s\n", hex_u64(f.schema_hash).c_str());
    std::map<std::int32_t, std::size_t> split_counts;
    std::size_t nodes = 0, leaves = 0;
    for (const auto& t : f.trees)
        for (const auto& n : t.nodes) {
            ++nodes;
            if (n.feature < 0) ++leaves;
            else ++split_counts[n.feature];
        }
    std::printf("nodes: %zu (%zu leaves)\n", nodes, leaves);
    std::printf("splits per feature index:\n");
    for (const auto& [feature, count] : split_counts)
        std::printf("  f%d: %zu\n", feature, count);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rbdpipe: automated RBD screening from limited-montage polysomnography"};
    app.require_subcommand(1);

    CommonOpts synth_opts, ingest_opts, extract_opts, stage_opts, metrics_opts, detect_opts,
        eval_opts, pipe_opts;
    std::string ingest_manifest, ingest_store, stage_features, metrics_staging, detect_csv,
        eval_csv, inspect_path;

    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic PSG cohort");
    add_common(synth_cmd, synth_opts);

    auto* ingest_cmd = app.add_subcommand("ingest", "normalize EDF+hypnogram pairs into a store");
    add_common(ingest_cmd, ingest_opts);
    ingest_cmd->add_option("--manifest", ingest_manifest,
                           "dataset manifest (subject_id,cohort,edf,hyp)");
    ingest_cmd->add_option("--store", ingest_store, "store directory to create");

    auto* extract_cmd = app.add_subcommand("extract", "compute per-epoch features for a store");
    add_common(extract_cmd, extract_opts);

    auto* stage_cmd = app.add_subcommand("stage", "cross-validated sleep staging");
    add_common(stage_cmd, stage_opts);
    stage_cmd->add_option("--features", stage_features, "features directory (from extract)");

    auto* metrics_cmd = app.add_subcommand("metrics", "RSWA + architecture metrics per subject");
    add_common(metrics_cmd, metrics_opts);
    metrics_cmd->add_option("--staging", metrics_staging,
                            "directory with automatic hypnograms (from stage)");

    auto* detect_cmd = app.add_subcommand("detect", "cross-validated RBD detection");
    add_common(detect_cmd, detect_opts);
    detect_cmd->add_option("--metrics", detect_csv, "subject metrics CSV");

    auto* eval_cmd = app.add_subcommand("evaluate", "manual vs automatic metric correlation");
    add_common(eval_cmd, eval_opts);
    eval_cmd->add_option("--metrics", eval_csv, "subject metrics CSV");

    auto* pipe_cmd = app.add_subcommand("pipeline", "run the full pipeline on a store");
    add_common(pipe_cmd, pipe_opts);

    auto* inspect_cmd = app.add_subcommand("inspect-model", "describe a trained model file");
    inspect_cmd->add_option("--model", inspect_path, "model JSON path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth_cmd->parsed()) return run_synth(synth_opts);
        if (ingest_cmd->parsed()) return run_ingest(ingest_opts, ingest_manifest, ingest_store);
        if (extract_cmd->parsed()) return run_extract(extract_opts);
        if (stage_cmd->parsed()) return run_stage(stage_opts, stage_features);
        if (metrics_cmd->parsed()) return run_metrics(metrics_opts, metrics_staging);
        if (detect_cmd->parsed()) return run_detect(detect_opts, detect_csv);
        if (eval_cmd->parsed()) return run_evaluate(eval_opts, eval_csv);
        if (pipe_cmd->parsed()) return run_full_pipeline(pipe_opts);
        if (inspect_cmd->parsed()) return run_inspect(inspect_path);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const InternalError& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 3;
    }
    return 2;
}
