#include "raresub/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "raresub/autoencoder.hpp"
#include "raresub/csv.hpp"
#include "raresub/diffexpr.hpp"
#include "raresub/error.hpp"
#include "raresub/report.hpp"
#include "raresub/sha256.hpp"
#include "raresub/stability.hpp"

namespace fs = std::filesystem;

namespace raresub {

namespace {

using nlohmann::json;

template <typename T>
void maybe_get(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

Config Config::from_json_text(const std::string& text) {
    Config cfg;
    if (text.empty()) return cfg;
    json root = json::parse(text, nullptr, false);
    if (root.is_discarded() || !root.is_object()) {
        throw Error(ErrorCode::MalformedJson, "config is not a JSON object");
    }
    // run manifests carry the resolved config under "config"
    const json& j = (root.contains("config") && root.contains("subcommand"))
                        ? root.at("config")
                        : root;

    if (j.contains("data")) {
        const json& d = j.at("data");
        maybe_get(d, "data_csv", cfg.data_csv);
        maybe_get(d, "labels_csv", cfg.labels_csv);
        maybe_get(d, "class", cfg.class_filter);
    }
    if (j.contains("preprocess")) {
        maybe_get(j.at("preprocess"), "top_n", cfg.top_n);
    }
    if (j.contains("autoencoder")) {
        const json& a = j.at("autoencoder");
        maybe_get(a, "latent_dim", cfg.latent_dim);
        maybe_get(a, "dropout_p", cfg.dropout_p);
        maybe_get(a, "learning_rate", cfg.learning_rate);
        maybe_get(a, "weight_decay", cfg.weight_decay);
        maybe_get(a, "batch_size", cfg.batch_size);
        maybe_get(a, "val_fraction", cfg.val_fraction);
        maybe_get(a, "patience", cfg.patience);
        maybe_get(a, "max_epochs", cfg.max_epochs);
    }
    if (j.contains("clustering")) {
        const json& c = j.at("clustering");
        maybe_get(c, "k_min", cfg.k_min);
        maybe_get(c, "k_max", cfg.k_max);
        maybe_get(c, "n_init", cfg.n_init);
    }
    if (j.contains("stability")) {
        const json& s = j.at("stability");
        maybe_get(s, "runs", cfg.stability_runs);
        maybe_get(s, "rare_threshold", cfg.rare_threshold);
        maybe_get(s, "stable_threshold", cfg.stable_threshold);
        maybe_get(s, "refit_n_init", cfg.refit_n_init);
    }
    if (j.contains("de")) {
        const json& d = j.at("de");
        maybe_get(d, "fdr_threshold", cfg.de_fdr_threshold);
        maybe_get(d, "effect_threshold", cfg.de_effect_threshold);
        maybe_get(d, "top_markers", cfg.top_markers);
        maybe_get(d, "cluster", cfg.de_cluster);
        maybe_get(d, "assignments", cfg.assignments_json);
    }
    if (j.contains("output")) {
        const json& o = j.at("output");
        maybe_get(o, "root", cfg.out_root);
        maybe_get(o, "dump_scaled", cfg.dump_scaled);
        maybe_get(o, "snapshot", cfg.snapshot);
    }
    maybe_get(j, "seed", cfg.seed);
    if (j.contains("synth")) {
        const json& s = j.at("synth");
        maybe_get(s, "n_samples", cfg.synth_spec.n_samples);
        maybe_get(s, "n_genes", cfg.synth_spec.n_genes);
        maybe_get(s, "n_background_clusters", cfg.synth_spec.n_background_clusters);
        maybe_get(s, "rare_fraction", cfg.synth_spec.rare_fraction);
        maybe_get(s, "n_marker_genes", cfg.synth_spec.n_marker_genes);
        maybe_get(s, "effect_size", cfg.synth_spec.effect_size);
        maybe_get(s, "noise_sigma", cfg.synth_spec.noise_sigma);
        maybe_get(s, "seed", cfg.synth_spec.seed);
        maybe_get(s, "cohort_label", cfg.synth_spec.cohort_label);
    }
    if (j.contains("report")) {
        maybe_get(j.at("report"), "run_dir", cfg.report_run_dir);
    }
    return cfg;
}

std::string Config::to_json_text() const {
    json j;
    j["data"] = {{"data_csv", data_csv}, {"labels_csv", labels_csv}, {"class", class_filter}};
    j["preprocess"] = {{"top_n", top_n}};
    j["autoencoder"] = {{"latent_dim", latent_dim},
                        {"dropout_p", dropout_p},
                        {"learning_rate", learning_rate},
                        {"weight_decay", weight_decay},
                        {"batch_size", batch_size},
                        {"val_fraction", val_fraction},
                        {"patience", patience},
                        {"max_epochs", max_epochs}};
    j["clustering"] = {{"k_min", k_min}, {"k_max", k_max}, {"n_init", n_init}};
    j["stability"] = {{"runs", stability_runs},
                      {"rare_threshold", rare_threshold},
                      {"stable_threshold", stable_threshold},
                      {"refit_n_init", refit_n_init}};
    j["de"] = {{"fdr_threshold", de_fdr_threshold},
               {"effect_threshold", de_effect_threshold},
               {"top_markers", top_markers},
               {"cluster", de_cluster},
               {"assignments", assignments_json}};
    j["output"] = {{"root", out_root}, {"dump_scaled", dump_scaled}, {"snapshot", snapshot}};
    j["seed"] = seed;
    j["synth"] = {{"n_samples", synth_spec.n_samples},
                  {"n_genes", synth_spec.n_genes},
                  {"n_background_clusters", synth_spec.n_background_clusters},
                  {"rare_fraction", synth_spec.rare_fraction},
                  {"n_marker_genes", synth_spec.n_marker_genes},
                  {"effect_size", synth_spec.effect_size},
                  {"noise_sigma", synth_spec.noise_sigma},
                  {"seed", synth_spec.seed},
                  {"cohort_label", synth_spec.cohort_label}};
    j["report"] = {{"run_dir", report_run_dir}};
    return j.dump(2);
}

namespace pipeline {

namespace {

std::string resolve_out_root(const Config& cfg) {
    if (!cfg.out_root.empty()) return cfg.out_root;
    if (const char* env = std::getenv("RARESUB_OUT_ROOT"); env && *env) return env;
    return "runs";
}

// <root>/<subcommand>-YYYYMMDD-HHMMSS[-n]; content inside stays timestamp
// free so reruns are byte comparable.
std::string make_run_dir(const Config& cfg, const std::string& subcommand,
                         bool with_figures = true) {
    const fs::path root = resolve_out_root(cfg);
    fs::create_directories(root);
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", &tm_utc);
    fs::path dir = root / (subcommand + "-" + stamp);
    for (int suffix = 2; fs::exists(dir); ++suffix) {
        dir = root / (subcommand + "-" + std::string(stamp) + "-" + std::to_string(suffix));
    }
    fs::create_directories(dir);
    if (with_figures) fs::create_directories(dir / "figures");
    return dir.string();
}

void write_manifest(const Config& cfg, const std::string& subcommand, const std::string& dir) {
    json manifest;
    manifest["tool"] = kToolName;
    manifest["version"] = kToolVersion;
    manifest["subcommand"] = subcommand;
    manifest["config"] = json::parse(cfg.to_json_text());
    manifest["decisions"] = {{"variance_ddof", 0},
                             {"welch_variance_ddof", 1},
                             {"weight_decay_mode", "coupled_l2_all_params"},
                             {"adam", {{"beta1", 0.9}, {"beta2", 0.999}, {"eps", 1e-8}}},
                             {"init", "glorot_uniform"},
                             {"loss_reported", "per_entry_mse"},
                             {"split", "seeded_shuffle_first_85_train"},
                             {"kmeans_init", "kmeans++"},
                             {"empty_cluster_repair", "farthest_point"},
                             {"stability_reference_run", "first_seed"},
                             {"silhouette_singleton", 0.0},
                             {"hvg_order", "variance_descending"},
                             {"latent_scatter", "pca_top2"}};
    json digests = json::object();
    if (!cfg.data_csv.empty() && fs::exists(cfg.data_csv)) {
        digests["data_csv"] = sha256_file_hex(cfg.data_csv);
    }
    if (!cfg.labels_csv.empty() && fs::exists(cfg.labels_csv)) {
        digests["labels_csv"] = sha256_file_hex(cfg.labels_csv);
    }
    manifest["input_digests"] = digests;
    csv::write_file((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

struct PreparedData {
    ExpressionMatrix matrix;  // joined (and possibly class-filtered)
    LoadReport load_report;
    ScaledMatrix scaled;
};

// load -> (filter) -> log1p -> hvg -> z-score; writes the load report and
// optional scaled-matrix dump into the run dir.
PreparedData prepare(const Config& cfg, const std::string& dir, bool apply_class_filter) {
    if (cfg.data_csv.empty() || cfg.labels_csv.empty()) {
        throw Error(ErrorCode::InvalidArgument, "data_csv and labels_csv are required");
    }
    PreparedData out;
    out.matrix = ingest::load_matrix(cfg.data_csv, cfg.labels_csv, &out.load_report);
    if (!out.load_report.violations.clean()) {
        throw Error(ErrorCode::NegativeInput,
                    "input matrix has " + std::to_string(out.load_report.violations.nan_count) +
                        " NaN, " + std::to_string(out.load_report.violations.inf_count) +
                        " inf, " + std::to_string(out.load_report.violations.negative_count) +
                        " negative entries");
    }
    csv::write_file((fs::path(dir) / "load_report.json").string(),
                    ingest::load_report_json(out.load_report));

    if (apply_class_filter) {
        if (cfg.class_filter.empty()) {
            throw Error(ErrorCode::InvalidArgument, "this subcommand needs a class filter");
        }
        out.matrix = ingest::filter_class(out.matrix, cfg.class_filter);
    }

    ExpressionMatrix logged = prep::log1p_transform(out.matrix);
    ExpressionMatrix hvg = prep::select_hvg(logged, static_cast<std::size_t>(cfg.top_n));
    out.scaled = prep::standardize(hvg);
    if (cfg.dump_scaled) {
        prep::save_scaled(out.scaled, (fs::path(dir) / "scaled.csv").string(),
                          (fs::path(dir) / "scaled_genes.json").string());
    }
    return out;
}

AeConfig ae_config_for(const Config& cfg, int input_dim) {
    AeConfig ae;
    ae.input_dim = input_dim;
    ae.latent_dim = cfg.latent_dim;
    ae.dropout_p = cfg.dropout_p;
    ae.learning_rate = cfg.learning_rate;
    ae.weight_decay = cfg.weight_decay;
    ae.batch_size = cfg.batch_size;
    ae.val_fraction = cfg.val_fraction;
    ae.patience = cfg.patience;
    ae.max_epochs = cfg.max_epochs;
    ae.seed = cfg.seed;
    return ae;
}

// train + encode + persist model, history and latent codes
LatentMatrix latent_stage(const Config& cfg, const ScaledMatrix& scaled, const std::string& dir,
                          TrainHistory* history_out = nullptr) {
    const AeConfig ae_cfg = ae_config_for(cfg, static_cast<int>(scaled.gene_ids.size()));
    TrainResult trained = ae::train(scaled, ae_cfg);
    if (trained.history.aborted_nonfinite) {
        throw Error(ErrorCode::NonFiniteLoss,
                    "training diverged at epoch " + std::to_string(trained.history.stopped_epoch));
    }
    ae::save_model(trained.model, (fs::path(dir) / "model.bin").string());
    ae::save_history_csv(trained.history, ae_cfg.input_dim,
                         (fs::path(dir) / "history.csv").string());
    LatentMatrix z = ae::encode(trained.model, scaled);
    report::save_latent_csv(z, (fs::path(dir) / "latent.csv").string());
    if (history_out) *history_out = trained.history;
    return z;
}

void emit_scan_figures(const KScanResult& scan, const std::string& dir) {
    const fs::path figures = fs::path(dir) / "figures";
    report::figure_metric_curve(scan, true, (figures / "silhouette.svg").string(),
                                (figures / "silhouette.csv").string());
    report::figure_metric_curve(scan, false, (figures / "dbi.svg").string(),
                                (figures / "dbi.csv").string());
}

int index_for_k(const KScanResult& scan, int k) {
    for (std::size_t i = 0; i < scan.entries.size(); ++i) {
        if (scan.entries[i].k == k) return static_cast<int>(i);
    }
    return -1;
}

}  // namespace

std::string run_ingest(const Config& cfg) {
    const std::string dir = make_run_dir(cfg, "ingest", false);
    if (cfg.data_csv.empty() || cfg.labels_csv.empty()) {
        throw Error(ErrorCode::InvalidArgument, "data_csv and labels_csv are required");
    }
    LoadReport report;
    ExpressionMatrix m = ingest::load_matrix(cfg.data_csv, cfg.labels_csv, &report);
    csv::write_file((fs::path(dir) / "load_report.json").string(),
                    ingest::load_report_json(report));
    if (cfg.snapshot) {
        ingest::save_matrix(m, (fs::path(dir) / "data.csv").string(),
                            (fs::path(dir) / "labels.csv").string());
    }
    write_manifest(cfg, "ingest", dir);
    return dir;
}

std::string run_synth(const Config& cfg) {
    const std::string dir = make_run_dir(cfg, "synth", false);
    SyntheticData data = synth::generate(cfg.synth_spec);
    synth::save(data, (fs::path(dir) / "data.csv").string(),
                (fs::path(dir) / "labels.csv").string(),
                (fs::path(dir) / "ground_truth.json").string());
    write_manifest(cfg, "synth", dir);
    return dir;
}

std::string run_scan_k(const Config& cfg) {
    const std::string dir = make_run_dir(cfg, "scan-k");
    PreparedData data = prepare(cfg, dir, !cfg.class_filter.empty());
    LatentMatrix z = latent_stage(cfg, data.scaled, dir);
    KScanResult scan = cluster::scan_k(z, cfg.k_min, cfg.k_max, cfg.n_init, cfg.seed);
    report::save_kscan_csv(scan, (fs::path(dir) / "kscan.csv").string());
    emit_scan_figures(scan, dir);
    write_manifest(cfg, "scan-k", dir);
    return dir;
}

namespace {

StabilityParams stability_params_for(const Config& cfg) {
    StabilityParams params;
    params.runs = cfg.stability_runs;
    params.base_seed = cfg.seed;
    params.n_init = cfg.n_init;
    params.rare_threshold = cfg.rare_threshold;
    params.stable_threshold = cfg.stable_threshold;
    return params;
}

json discovery_json(const DiscoveryReport& report) {
    json hits = json::array();
    for (const DiscoveryHit& hit : report.hits) {
        hits.push_back({{"k", hit.k},
                        {"cluster", hit.cluster},
                        {"prevalence", hit.prevalence},
                        {"jaccard", hit.jaccard},
                        {"silhouette", hit.silhouette}});
    }
    json j;
    j["k_min"] = report.k_min;
    j["k_max"] = report.k_max;
    j["hits"] = hits;
    j["found"] = report.found;
    j["chosen_k"] = report.chosen_k;
    j["chosen_cluster"] = report.chosen_cluster;
    j["rationale"] = report.rationale;
    return j;
}

}  // namespace

std::string run_stability(const Config& cfg) {
    const std::string dir = make_run_dir(cfg, "stability");
    PreparedData data = prepare(cfg, dir, !cfg.class_filter.empty());
    LatentMatrix z = latent_stage(cfg, data.scaled, dir);
    DiscoveryReport discovery =
        stability::discovery_scan(z, cfg.k_min, cfg.k_max, stability_params_for(cfg));
    report::save_stability_csv(discovery.rows, (fs::path(dir) / "stability.csv").string());
    csv::write_file((fs::path(dir) / "discovery.json").string(),
                    discovery_json(discovery).dump(2) + "\n");
    const int bar_k = discovery.found ? discovery.chosen_k : cfg.k_min;
    report::figure_stability_bars(discovery.rows, bar_k,
                                  discovery.found ? discovery.chosen_cluster : -1,
                                  cfg.stable_threshold,
                                  (fs::path(dir) / "figures" / "stability.svg").string(),
                                  (fs::path(dir) / "figures" / "stability.csv").string());
    write_manifest(cfg, "stability", dir);
    return dir;
}

std::string run_pan(const Config& cfg) {
    const std::string dir = make_run_dir(cfg, "pan");
    PreparedData data = prepare(cfg, dir, false);
    TrainHistory history;
    LatentMatrix z = latent_stage(cfg, data.scaled, dir, &history);

    KScanResult scan = cluster::scan_k(z, cfg.k_min, cfg.k_max, cfg.n_init, cfg.seed);
    report::save_kscan_csv(scan, (fs::path(dir) / "kscan.csv").string());
    emit_scan_figures(scan, dir);

    // silhouette-selected k
    int k_selected = scan.entries.front().k;
    double best_sil = scan.entries.front().silhouette;
    for (const KScanEntry& e : scan.entries) {
        if (e.silhouette > best_sil) {
            best_sil = e.silhouette;
            k_selected = e.k;
        }
    }

    DiscoveryReport discovery =
        stability::discovery_scan(z, cfg.k_min, cfg.k_max, stability_params_for(cfg));
    report::save_stability_csv(discovery.rows, (fs::path(dir) / "stability.csv").string());
    csv::write_file((fs::path(dir) / "discovery.json").string(),
                    discovery_json(discovery).dump(2) + "\n");

    ClusteringSolution solution =
        stability::final_refit(z, k_selected, cfg.refit_n_init, cfg.seed);
    report::save_clustering_json(solution, z.sample_ids,
                                 (fs::path(dir) / "clustering.json").string());

    ContingencyTable table = report::contingency(data.matrix.class_labels, solution.labels);
    report::save_contingency_csv(table, (fs::path(dir) / "contingency.csv").string());
    const stats::ContingencyResult chi = stats::chi_square_independence(table.counts);

    // modal capture: share of each class landing in its most common cluster
    json modal = json::object();
    double min_capture = 1.0;
    for (std::size_t r = 0; r < table.row_labels.size(); ++r) {
        const double best =
            *std::max_element(table.normalized[r].begin(), table.normalized[r].end());
        modal[table.row_labels[r]] = best;
        min_capture = std::min(min_capture, best);
    }

    const fs::path figures = fs::path(dir) / "figures";
    report::figure_cluster_sizes(solution.cluster_sizes(), solution.k, -1,
                                 (figures / "cluster_sizes.svg").string(),
                                 (figures / "cluster_sizes.csv").string());
    report::figure_stability_bars(discovery.rows, k_selected, -1, cfg.stable_threshold,
                                  (figures / "stability.svg").string(),
                                  (figures / "stability.csv").string());
    report::figure_latent_scatter(z, solution.labels, -1,
                                  (figures / "latent_scatter.svg").string(),
                                  (figures / "latent_scatter.csv").string());

    json summary;
    summary["n_samples"] = data.matrix.n_samples();
    summary["n_genes_selected"] = data.scaled.gene_ids.size();
    summary["k_selected"] = k_selected;
    summary["silhouette"] = best_sil;
    summary["dbi"] = scan.entries[static_cast<std::size_t>(index_for_k(scan, k_selected))]
                         .davies_bouldin;
    summary["chi2"] = chi.chi2;
    summary["chi2_dof"] = chi.dof;
    summary["p_value"] = chi.p_value;
    summary["p_display"] = chi.p_value < 1e-300 ? "<1e-300" : csv::format_double(chi.p_value);
    summary["cramers_v"] = chi.cramers_v;
    summary["cramers_v_mindim"] = chi.cramers_v_mindim;
    summary["modal_capture"] = modal;
    summary["min_modal_capture"] = min_capture;
    summary["val_mse"] = history.best_val_mse;
    csv::write_file((fs::path(dir) / "summary.json").string(), summary.dump(2) + "\n");

    write_manifest(cfg, "pan", dir);
    return dir;
}

std::string run_within(const Config& cfg) {
    const std::string dir = make_run_dir(cfg, "within");
    PreparedData data = prepare(cfg, dir, true);
    TrainHistory history;
    LatentMatrix z = latent_stage(cfg, data.scaled, dir, &history);

    KScanResult scan = cluster::scan_k(z, cfg.k_min, cfg.k_max, cfg.n_init, cfg.seed);
    report::save_kscan_csv(scan, (fs::path(dir) / "kscan.csv").string());
    emit_scan_figures(scan, dir);

    DiscoveryReport discovery =
        stability::discovery_scan(z, cfg.k_min, cfg.k_max, stability_params_for(cfg));
    report::save_stability_csv(discovery.rows, (fs::path(dir) / "stability.csv").string());
    csv::write_file((fs::path(dir) / "discovery.json").string(),
                    discovery_json(discovery).dump(2) + "\n");

    const fs::path figures = fs::path(dir) / "figures";
    json summary;
    summary["n_samples"] = data.matrix.n_samples();
    summary["n_genes_selected"] = data.scaled.gene_ids.size();
    summary["class"] = cfg.class_filter;
    summary["val_mse"] = history.best_val_mse;
    summary["found"] = discovery.found;

    int k_final = 0;
    int rare_refit_cluster = -1;
    if (discovery.found) {
        k_final = discovery.chosen_k;
        ClusteringSolution solution =
            stability::final_refit(z, k_final, cfg.refit_n_init, cfg.seed);
        report::save_clustering_json(solution, z.sample_ids,
                                     (fs::path(dir) / "clustering.json").string());

        // the discovery hit indexes the stability reference run; map it onto
        // the refit labeling before reporting and DE
        ClusteringSolution reference =
            cluster::kmeans(z, k_final, cfg.n_init, cfg.seed);
        LabelAlignment alignment = stability::align(reference.labels, solution.labels, k_final);
        for (int j = 0; j < k_final; ++j) {
            if (alignment.run_to_reference[static_cast<std::size_t>(j)] ==
                discovery.chosen_cluster) {
                rare_refit_cluster = j;
                break;
            }
        }

        const std::vector<std::size_t> sizes = solution.cluster_sizes();
        const DiscoveryHit* hit = nullptr;
        for (const DiscoveryHit& h : discovery.hits) {
            if (h.k == discovery.chosen_k && h.cluster == discovery.chosen_cluster) hit = &h;
        }

        report::figure_cluster_sizes(sizes, k_final, rare_refit_cluster,
                                     (figures / "cluster_sizes.svg").string(),
                                     (figures / "cluster_sizes.csv").string());
        report::figure_stability_bars(discovery.rows, k_final, discovery.chosen_cluster,
                                      cfg.stable_threshold, (figures / "stability.svg").string(),
                                      (figures / "stability.csv").string());
        report::figure_latent_scatter(z, solution.labels, rare_refit_cluster,
                                      (figures / "latent_scatter.svg").string(),
                                      (figures / "latent_scatter.csv").string());

        const std::size_t rare_size = sizes[static_cast<std::size_t>(rare_refit_cluster)];
        bool de_done = false;
        if (rare_size >= 2 && z.n_samples() - rare_size >= 2) {
            DeTable de_table =
                de::de_cluster_vs_rest(data.scaled, solution.labels, rare_refit_cluster);
            de::save_de_csv(
                de_table,
                (fs::path(dir) / ("de_c" + std::to_string(rare_refit_cluster) + ".csv"))
                    .string());
            const MarkerSelection markers =
                de::select_markers(de_table, cfg.de_fdr_threshold,
                                   static_cast<std::size_t>(cfg.top_markers));
            const std::vector<VolcanoPoint> volcano =
                de::volcano_data(de_table, cfg.de_fdr_threshold, cfg.de_effect_threshold);
            report::figure_volcano(volcano, (figures / "volcano.svg").string(),
                                   (figures / "volcano.csv").string());
            if (!markers.top_up.empty() || !markers.top_down.empty()) {
                const HeatmapData heatmap =
                    de::heatmap_data(data.scaled, solution.labels, rare_refit_cluster, markers);
                report::figure_heatmap(heatmap, (figures / "heatmap.svg").string(),
                                       (figures / "heatmap.csv").string());
            }
            summary["marker_shortfall"] = markers.shortfall;
            de_done = true;
        } else {
            summary["note"] = "rare cluster too small for cluster-vs-rest DE";
            summary["skipped_figures"] = {"volcano", "heatmap"};
        }
        summary["de_done"] = de_done;

        const int scan_idx = index_for_k(scan, k_final);
        summary["k_chosen"] = k_final;
        summary["rare_cluster"] = rare_refit_cluster;
        summary["rare_cluster_reference_index"] = discovery.chosen_cluster;
        summary["prevalence"] =
            static_cast<double>(sizes[static_cast<std::size_t>(rare_refit_cluster)]) /
            static_cast<double>(z.n_samples());
        summary["jaccard"] = hit ? hit->jaccard : 0.0;
        summary["silhouette"] = scan.entries[static_cast<std::size_t>(scan_idx)].silhouette;
        summary["dbi"] = scan.entries[static_cast<std::size_t>(scan_idx)].davies_bouldin;
        summary["separation"] =
            report::cluster_separation(z, solution.labels, rare_refit_cluster);
    } else {
        // no discovery: keep the index figures on the silhouette-best k
        int k_best = scan.entries.front().k;
        double best_sil = scan.entries.front().silhouette;
        for (const KScanEntry& e : scan.entries) {
            if (e.silhouette > best_sil) {
                best_sil = e.silhouette;
                k_best = e.k;
            }
        }
        ClusteringSolution solution = stability::final_refit(z, k_best, cfg.refit_n_init, cfg.seed);
        report::save_clustering_json(solution, z.sample_ids,
                                     (fs::path(dir) / "clustering.json").string());
        report::figure_cluster_sizes(solution.cluster_sizes(), k_best, -1,
                                     (figures / "cluster_sizes.svg").string(),
                                     (figures / "cluster_sizes.csv").string());
        report::figure_stability_bars(discovery.rows, k_best, -1, cfg.stable_threshold,
                                      (figures / "stability.svg").string(),
                                      (figures / "stability.csv").string());
        report::figure_latent_scatter(z, solution.labels, -1,
                                      (figures / "latent_scatter.svg").string(),
                                      (figures / "latent_scatter.csv").string());
        summary["k_chosen"] = nullptr;
        summary["note"] = "no rare-and-stable cluster found; volcano and heatmap skipped";
        summary["skipped_figures"] = {"volcano", "heatmap"};
    }
    csv::write_file((fs::path(dir) / "summary.json").string(), summary.dump(2) + "\n");
    write_manifest(cfg, "within", dir);
    return dir;
}

std::string run_de(const Config& cfg) {
    const std::string dir = make_run_dir(cfg, "de");
    if (cfg.de_cluster < 0) {
        throw Error(ErrorCode::InvalidArgument, "de needs a cluster id (>= 0)");
    }
    if (cfg.assignments_json.empty()) {
        throw Error(ErrorCode::InvalidArgument,
                    "de needs an assignments clustering.json from a previous run");
    }
    PreparedData data = prepare(cfg, dir, !cfg.class_filter.empty());
    auto [solution, sample_ids] = report::load_clustering_json(cfg.assignments_json);
    std::unordered_map<std::string, int> label_of;
    for (std::size_t i = 0; i < sample_ids.size(); ++i) {
        label_of[sample_ids[i]] = solution.labels[i];
    }
    std::vector<int> labels;
    labels.reserve(data.scaled.sample_ids.size());
    for (const std::string& id : data.scaled.sample_ids) {
        auto it = label_of.find(id);
        if (it == label_of.end()) {
            throw Error(ErrorCode::ShapeMismatch,
                        "assignments file lacks a label for sample '" + id + "'");
        }
        labels.push_back(it->second);
    }

    DeTable table = de::de_cluster_vs_rest(data.scaled, labels, cfg.de_cluster);
    de::save_de_csv(table,
                    (fs::path(dir) / ("de_c" + std::to_string(cfg.de_cluster) + ".csv")).string());

    const fs::path figures = fs::path(dir) / "figures";
    const std::vector<VolcanoPoint> volcano =
        de::volcano_data(table, cfg.de_fdr_threshold, cfg.de_effect_threshold);
    report::figure_volcano(volcano, (figures / "volcano.svg").string(),
                           (figures / "volcano.csv").string());
    const MarkerSelection markers = de::select_markers(
        table, cfg.de_fdr_threshold, static_cast<std::size_t>(cfg.top_markers));
    if (!markers.top_up.empty() || !markers.top_down.empty()) {
        const HeatmapData heatmap =
            de::heatmap_data(data.scaled, labels, cfg.de_cluster, markers);
        report::figure_heatmap(heatmap, (figures / "heatmap.svg").string(),
                               (figures / "heatmap.csv").string());
    }
    write_manifest(cfg, "de", dir);
    return dir;
}

std::string run_report(const Config& cfg) {
    if (cfg.report_run_dir.empty()) {
        throw Error(ErrorCode::InvalidArgument, "report needs the run directory to re-render");
    }
    const fs::path src(cfg.report_run_dir);
    if (!fs::exists(src)) {
        throw Error(ErrorCode::MissingFile, "run directory '" + src.string() + "' not found");
    }
    const std::string dir = make_run_dir(cfg, "report");
    const fs::path figures = fs::path(dir) / "figures";

    bool rendered_any = false;
    if (fs::exists(src / "kscan.csv")) {
        KScanResult scan = report::load_kscan_csv((src / "kscan.csv").string());
        emit_scan_figures(scan, dir);
        rendered_any = true;
    }

    int chosen_k = -1;
    int chosen_cluster = -1;
    if (fs::exists(src / "discovery.json")) {
        std::ifstream in(src / "discovery.json");
        json j = json::parse(in, nullptr, false);
        if (!j.is_discarded() && j.value("found", false)) {
            chosen_k = j.at("chosen_k").get<int>();
            chosen_cluster = j.at("chosen_cluster").get<int>();
        }
    }

    ClusteringSolution solution;
    std::vector<std::string> solution_ids;
    bool have_solution = false;
    if (fs::exists(src / "clustering.json")) {
        std::tie(solution, solution_ids) =
            report::load_clustering_json((src / "clustering.json").string());
        have_solution = true;
    }

    if (fs::exists(src / "stability.csv")) {
        const std::vector<ClusterStability> rows =
            report::load_stability_csv((src / "stability.csv").string());
        const int bar_k = chosen_k > 0 ? chosen_k : (have_solution ? solution.k : cfg.k_min);
        report::figure_stability_bars(rows, bar_k, chosen_cluster, cfg.stable_threshold,
                                      (figures / "stability.svg").string(),
                                      (figures / "stability.csv").string());
        rendered_any = true;
    }

    if (have_solution) {
        // figure ids follow the refit labeling: map the reference-run hit
        // through stored labels only when both ids coincide (re-render keeps
        // whatever the original run recorded in the sizes figure)
        int rare_cluster = -1;
        if (fs::exists(src / "figures" / "cluster_sizes.csv")) {
            csv::Table t = csv::read_file((src / "figures" / "cluster_sizes.csv").string());
            for (std::size_t r = 1; r < t.rows.size(); ++r) {
                if (t.rows[r].size() == 3 && t.rows[r][2] == "1") {
                    rare_cluster = static_cast<int>(csv::parse_double(t.rows[r][0], r, 0));
                }
            }
        }
        report::figure_cluster_sizes(solution.cluster_sizes(), solution.k, rare_cluster,
                                     (figures / "cluster_sizes.svg").string(),
                                     (figures / "cluster_sizes.csv").string());
        if (fs::exists(src / "latent.csv")) {
            LatentMatrix z = report::load_latent_csv((src / "latent.csv").string());
            std::unordered_map<std::string, int> label_of;
            for (std::size_t i = 0; i < solution_ids.size(); ++i) {
                label_of[solution_ids[i]] = solution.labels[i];
            }
            std::vector<int> labels;
            labels.reserve(z.sample_ids.size());
            for (const std::string& id : z.sample_ids) labels.push_back(label_of.at(id));
            report::figure_latent_scatter(z, labels, rare_cluster,
                                          (figures / "latent_scatter.svg").string(),
                                          (figures / "latent_scatter.csv").string());
        }
        rendered_any = true;
    }

    for (const auto& entry : fs::directory_iterator(src)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("de_c", 0) == 0 && entry.path().extension() == ".csv") {
            DeTable table = de::load_de_csv(entry.path().string());
            const std::vector<VolcanoPoint> volcano =
                de::volcano_data(table, cfg.de_fdr_threshold, cfg.de_effect_threshold);
            report::figure_volcano(volcano, (figures / "volcano.svg").string(),
                                   (figures / "volcano.csv").string());
            rendered_any = true;
        }
    }

    if (!rendered_any) {
        throw Error(ErrorCode::MissingUpstream,
                    "'" + src.string() + "' holds no artifacts this command can render");
    }
    write_manifest(cfg, "report", dir);
    return dir;
}

}  // namespace pipeline
}  // namespace raresub
