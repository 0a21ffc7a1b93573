// raresub command line: batch rare-subtype discovery runs on expression
// matrices. Thin wrapper over the raresub C API; every subcommand assembles a
// config JSON document (config file + flag overrides) and hands it to the
// corresponding rsd_run_* entry point.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "raresub.h"

namespace {

using nlohmann::json;

// exit codes: 0 ok, 1 usage, 2 config, 3 data/input, 4 numeric, 5 internal
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;
constexpr int kExitInternal = 5;

int exit_code_for(rsd_status status) {
    switch (status) {
        case RSD_OK: return 0;
        case RSD_ERR_INVALID_ARGUMENT: return kExitConfig;
        case RSD_ERR_IO:
        case RSD_ERR_FORMAT:
        case RSD_ERR_DATA: return kExitData;
        case RSD_ERR_NUMERIC: return kExitNumeric;
        case RSD_ERR_STATE: return kExitInternal;
    }
    return kExitInternal;
}

struct CommonFlags {
    std::string config_path;
    std::string data_csv;
    std::string labels_csv;
    std::string class_name;
    std::string out_dir;
    std::string assignments;
    std::string spec_path;
    std::string run_dir;
    long long seed = -1;
    int k_min = -1;
    int k_max = -1;
    int runs = -1;
    int cluster = -1;
    int top_n = -1;
    bool snapshot = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file (or a run manifest)");
    cmd->add_option("--data", flags.data_csv, "expression CSV (id + gene columns)");
    cmd->add_option("--labels", flags.labels_csv, "labels CSV (id,Class)");
    cmd->add_option("--out", flags.out_dir, "output root (default $RARESUB_OUT_ROOT or ./runs)");
    cmd->add_option("--seed", flags.seed, "master seed");
    cmd->add_option("--k-min", flags.k_min, "smallest k to scan");
    cmd->add_option("--k-max", flags.k_max, "largest k to scan");
    cmd->add_option("--runs", flags.runs, "stability runs per k");
    cmd->add_option("--top-n", flags.top_n, "number of highly variable genes");
}

json load_config_json(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config file '" + path + "'");
    }
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw std::runtime_error("config file '" + path + "' is not valid JSON");
    }
    // accept a run manifest as a config source
    if (doc.contains("config") && doc.contains("subcommand")) return doc["config"];
    return doc;
}

json build_config(const CommonFlags& flags) {
    json cfg = load_config_json(flags.config_path);
    auto section = [&cfg](const char* name) -> json& {
        if (!cfg.contains(name) || !cfg[name].is_object()) cfg[name] = json::object();
        return cfg[name];
    };
    if (!flags.data_csv.empty()) section("data")["data_csv"] = flags.data_csv;
    if (!flags.labels_csv.empty()) section("data")["labels_csv"] = flags.labels_csv;
    if (!flags.class_name.empty()) section("data")["class"] = flags.class_name;
    if (!flags.out_dir.empty()) section("output")["root"] = flags.out_dir;
    if (flags.snapshot) section("output")["snapshot"] = true;
    if (flags.seed >= 0) cfg["seed"] = flags.seed;
    if (flags.k_min >= 0) section("clustering")["k_min"] = flags.k_min;
    if (flags.k_max >= 0) section("clustering")["k_max"] = flags.k_max;
    if (flags.runs >= 0) section("stability")["runs"] = flags.runs;
    if (flags.top_n >= 0) section("preprocess")["top_n"] = flags.top_n;
    if (flags.cluster >= 0) section("de")["cluster"] = flags.cluster;
    if (!flags.assignments.empty()) section("de")["assignments"] = flags.assignments;
    if (!flags.spec_path.empty()) {
        std::ifstream in(flags.spec_path);
        if (!in) {
            throw std::runtime_error("cannot open spec file '" + flags.spec_path + "'");
        }
        json spec = json::parse(in, nullptr, false);
        if (spec.is_discarded() || !spec.is_object()) {
            throw std::runtime_error("spec file '" + flags.spec_path + "' is not valid JSON");
        }
        cfg["synth"] = spec;
    }
    if (!flags.run_dir.empty()) section("report")["run_dir"] = flags.run_dir;
    return cfg;
}

using Runner = rsd_status (*)(const char*, char*, size_t);

int run(Runner runner, const CommonFlags& flags, const char* name) {
    json cfg;
    try {
        cfg = build_config(flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    const std::string cfg_text = cfg.dump();
    char run_dir[4096] = {0};
    const rsd_status status = runner(cfg_text.c_str(), run_dir, sizeof(run_dir));
    if (status != RSD_OK) {
        std::cerr << "error (" << name << "): " << rsd_last_error() << "\n";
        return exit_code_for(status);
    }
    std::cout << run_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rare-subtype discovery for expression matrices (v" +
                 std::string(rsd_version()) + ")"};
    app.require_subcommand(1);

    CommonFlags ingest_flags, synth_flags, pan_flags, within_flags, scan_flags, stab_flags,
        de_flags, report_flags;

    CLI::App* ingest = app.add_subcommand("ingest", "load, join and validate the input CSVs");
    add_common_flags(ingest, ingest_flags);
    ingest->add_flag("--snapshot", ingest_flags.snapshot, "write a normalized CSV snapshot");

    CLI::App* synth = app.add_subcommand("synth", "generate a planted synthetic dataset");
    add_common_flags(synth, synth_flags);
    synth->add_option("--spec", synth_flags.spec_path, "synthetic spec JSON file");

    CLI::App* pan = app.add_subcommand("pan", "pan-cancer control: cluster all samples");
    add_common_flags(pan, pan_flags);

    CLI::App* within = app.add_subcommand("within", "full within-class discovery pipeline");
    add_common_flags(within, within_flags);
    within->add_option("--class", within_flags.class_name, "class to analyse (e.g. KIRC)")
        ->required();

    CLI::App* scan = app.add_subcommand("scan-k", "k-means scan with validity indices");
    add_common_flags(scan, scan_flags);
    scan->add_option("--class", scan_flags.class_name, "optional class filter");

    CLI::App* stab = app.add_subcommand("stability", "stability analysis and discovery rule");
    add_common_flags(stab, stab_flags);
    stab->add_option("--class", stab_flags.class_name, "optional class filter");

    CLI::App* de = app.add_subcommand("de", "cluster-vs-rest differential expression");
    add_common_flags(de, de_flags);
    de->add_option("--class", de_flags.class_name, "optional class filter");
    de->add_option("--cluster", de_flags.cluster, "cluster id to contrast")->required();
    de->add_option("--assignments", de_flags.assignments,
                   "clustering.json from a previous run")
        ->required();

    CLI::App* report = app.add_subcommand("report", "re-render figures from a run directory");
    add_common_flags(report, report_flags);
    report->add_option("--run", report_flags.run_dir, "run directory to re-render")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    if (ingest->parsed()) return run(&rsd_run_ingest, ingest_flags, "ingest");
    if (synth->parsed()) return run(&rsd_run_synth, synth_flags, "synth");
    if (pan->parsed()) return run(&rsd_run_pan, pan_flags, "pan");
    if (within->parsed()) return run(&rsd_run_within, within_flags, "within");
    if (scan->parsed()) return run(&rsd_run_scan_k, scan_flags, "scan-k");
    if (stab->parsed()) return run(&rsd_run_stability, stab_flags, "stability");
    if (de->parsed()) return run(&rsd_run_de, de_flags, "de");
    if (report->parsed()) return run(&rsd_run_report, report_flags, "report");
    return kExitUsage;
}
