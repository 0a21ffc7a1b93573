#ifndef RARESUB_PIPELINE_HPP
#define RARESUB_PIPELINE_HPP

#include <cstdint>
#include <string>

#include "raresub/synth.hpp"

namespace raresub {

inline constexpr const char* kToolName = "raresub";
inline constexpr const char* kToolVersion = "0.1.0";

// Resolved settings for one run. Defaults mirror the standard analysis:
// top 2000 variable genes, 128-d latent space, k in [2,10], 20 stability
// runs, 0.10/0.60 rare/stable thresholds, n_init 10 (scan) / 30 (refit).
struct Config {
    std::string data_csv;
    std::string labels_csv;
    std::string class_filter;

    int top_n = 2000;

    int latent_dim = 128;
    double dropout_p = 0.1;
    double learning_rate = 1e-3;
    double weight_decay = 1e-5;
    int batch_size = 256;
    double val_fraction = 0.15;
    int patience = 15;
    int max_epochs = 500;

    int k_min = 2;
    int k_max = 10;
    int n_init = 10;

    int stability_runs = 20;
    double rare_threshold = 0.10;
    double stable_threshold = 0.60;
    int refit_n_init = 30;

    double de_fdr_threshold = 0.05;
    double de_effect_threshold = 0.6;
    int top_markers = 20;
    int de_cluster = -1;
    std::string assignments_json;

    std::string out_root;  // empty -> $RARESUB_OUT_ROOT or "runs"
    bool dump_scaled = true;
    bool snapshot = false;

    std::uint64_t seed = 42;

    SyntheticSpec synth_spec;
    std::string report_run_dir;

    // Accepts either a plain config document or a run manifest (the manifest
    // embeds the config under "config").
    static Config from_json_text(const std::string& text);
    std::string to_json_text() const;
};

namespace pipeline {

// Each runner creates <out_root>/<subcommand>-<utc timestamp>/ and returns
// the directory path. Artifacts and the run manifest land inside.
std::string run_ingest(const Config& config);
std::string run_synth(const Config& config);
std::string run_pan(const Config& config);
std::string run_within(const Config& config);
std::string run_scan_k(const Config& config);
std::string run_stability(const Config& config);
std::string run_de(const Config& config);
std::string run_report(const Config& config);

}  // namespace pipeline
}  // namespace raresub

#endif
