// Acceptance suite. Each criterion prints one [PASS]/[FAIL] line; criteria
// that need the UCI RNA-seq files ([SKIP]) when RARESUB_UCI_DATA /
// RARESUB_UCI_LABELS do not point at them. Run with a criterion id
// (1..6, surrogate-pan, surrogate-within, cli-e2e) or no argument for all.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "raresub/autoencoder.hpp"
#include "raresub/clustering.hpp"
#include "raresub/diffexpr.hpp"
#include "raresub/ingest.hpp"
#include "raresub/pipeline.hpp"
#include "raresub/preprocess.hpp"
#include "raresub/report.hpp"
#include "raresub/rng.hpp"
#include "raresub/stability.hpp"
#include "raresub/stats.hpp"
#include "raresub/synth.hpp"

using namespace raresub;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report_line(const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    if (!pass) ++g_failures;
}

void skip_line(const std::string& name, const std::string& reason) {
    std::printf("[SKIP] %s: %s\n", name.c_str(), reason.c_str());
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

fs::path scratch_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("raresub_acceptance_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// ---------- criterion 1: deterministic oracle suites ----------

void criterion_1() {
    Timer timer;

    // Hungarian vs factorial brute force, exact cost equality
    {
        Pcg32 rng(1001);
        int exact = 0, total = 0;
        for (int n : {5, 6, 7}) {
            for (int trial = 0; trial < 200; ++trial) {
                std::vector<std::vector<double>> cost(
                    static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n)));
                for (auto& row : cost) {
                    for (double& v : row) v = rng.next_double() * 20.0 - 5.0;
                }
                const std::vector<int> perm = stability::hungarian(cost);
                double mine = 0.0;
                for (int i = 0; i < n; ++i) {
                    mine += cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(perm[i])];
                }
                ++total;
                if (mine == oracles::assignment_min_cost(cost)) ++exact;
            }
        }
        report_line("criterion-1 hungarian-brute-force", exact == total,
                    std::to_string(exact) + "/" + std::to_string(total) + " exact cost matches");
    }

    // silhouette / DBI vs direct-definition oracles
    {
        Pcg32 rng(1002);
        double worst = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            const int n = 10 + static_cast<int>(rng.next_below(31));
            const int d = 1 + static_cast<int>(rng.next_below(6));
            const int k = 2 + static_cast<int>(rng.next_below(4));
            LatentMatrix z;
            z.values.resize(n, d);
            for (Eigen::Index i = 0; i < z.values.size(); ++i) {
                z.values.data()[i] = rng.next_gaussian();
            }
            for (int i = 0; i < n; ++i) z.sample_ids.push_back("p" + std::to_string(i));
            std::vector<int> labels(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                labels[static_cast<std::size_t>(i)] =
                    (i < k) ? i : static_cast<int>(rng.next_below(static_cast<std::uint32_t>(k)));
            }
            worst = std::max(worst, std::fabs(cluster::silhouette(z, labels) -
                                              oracles::silhouette_direct(z.values, labels)));
            worst = std::max(worst, std::fabs(cluster::davies_bouldin(z, labels) -
                                              oracles::davies_bouldin_direct(z.values, labels)));
        }
        report_line("criterion-1 silhouette-dbi-oracles", worst < 1e-9,
                    "max |diff| = " + fmt(worst) + " over 50 instances");
    }

    // t_cdf and gamma_q vs adaptive quadrature
    {
        Pcg32 rng(1003);
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
            const double x = (rng.next_double() - 0.5) * 12.0;
            const double df = 1.0 + rng.next_double() * 49.0;
            worst = std::max(worst, std::fabs(stats::t_cdf(x, df) -
                                              oracles::t_cdf_quadrature(x, df)));
        }
        for (int i = 0; i < 50; ++i) {
            const double a = 0.3 + rng.next_double() * 19.7;
            const double x = rng.next_double() * (a + 10.0);
            worst = std::max(worst, std::fabs(stats::gamma_q(a, x) -
                                              oracles::gamma_q_quadrature(a, x)));
        }
        report_line("criterion-1 special-function-quadrature", worst < 1e-7,
                    "max |diff| = " + fmt(worst) + " over 50+50 points");
    }

    // BH vs the independent step-up definition, exact
    {
        Pcg32 rng(1004);
        bool exact = true;
        for (int trial = 0; trial < 25 && exact; ++trial) {
            std::vector<double> p(1 + rng.next_below(300));
            for (double& v : p) v = rng.next_double();
            const std::vector<double> mine = stats::bh_fdr(p);
            const std::vector<double> ref = oracles::bh_direct(p);
            for (std::size_t i = 0; i < p.size(); ++i) {
                if (mine[i] != ref[i]) exact = false;
            }
        }
        report_line("criterion-1 bh-step-up", exact, "25 random vectors, exact q equality");
    }

    // gradient check on ten seeded small instances
    {
        double worst = 0.0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            AutoencoderModel model;
            model.config.input_dim = 10;
            model.config.latent_dim = 4;
            model.config.weight_decay = 1e-5;
            model.config.dropout_p = 0.0;
            const std::vector<std::pair<int, int>> dims = {{10, 8}, {8, 6}, {6, 4},
                                                           {4, 6},  {6, 8}, {8, 10}};
            const std::vector<bool> relu = {true, true, false, true, true, false};
            Pcg32 rng(seed);
            for (std::size_t li = 0; li < dims.size(); ++li) {
                DenseLayer layer;
                layer.weight.resize(dims[li].first, dims[li].second);
                for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
                    layer.weight.data()[i] = 0.4 * rng.next_gaussian();
                }
                layer.bias.resize(dims[li].second);
                for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
                    layer.bias.data()[i] = 0.1 * rng.next_gaussian();
                }
                layer.relu = relu[li];
                layer.dropout = (li == 0);
                model.layers.push_back(std::move(layer));
            }
            Eigen::MatrixXd x(6, 10);
            for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.next_gaussian();
            worst = std::max(worst, ae::gradient_check(model, x));
        }
        report_line("criterion-1 gradient-check", worst < 1e-5,
                    "max relative error = " + fmt(worst) + " over 10 seeds");
    }

    std::printf("criterion-1 elapsed: %.1fs\n", Timer{timer}.seconds());
}

// ---------- criterion 2: planted-subtype end-to-end ----------

struct PipelineOutcome {
    bool found = false;
    double member_jaccard = 0.0;  // best hit members vs planted members
    std::vector<int> refit_labels;
    int refit_rare_cluster = -1;
    int chosen_k = 0;
};

PipelineOutcome run_discovery(const SyntheticData& data, std::uint64_t pipeline_seed) {
    const ExpressionMatrix logged = prep::log1p_transform(data.matrix);
    const ExpressionMatrix hvg = prep::select_hvg(logged, 2000);
    const ScaledMatrix scaled = prep::standardize(hvg);

    AeConfig ae_cfg;
    ae_cfg.input_dim = static_cast<int>(scaled.gene_ids.size());
    ae_cfg.seed = pipeline_seed;
    const TrainResult trained = ae::train(scaled, ae_cfg);
    const LatentMatrix z = ae::encode(trained.model, scaled);

    StabilityParams params;
    params.runs = 20;
    params.base_seed = pipeline_seed;
    params.n_init = 10;
    const DiscoveryReport discovery = stability::discovery_scan(z, 2, 10, params);

    PipelineOutcome outcome;
    outcome.found = discovery.found;
    if (!discovery.found) return outcome;
    outcome.chosen_k = discovery.chosen_k;

    // the hit indexes the stability reference run at the chosen k
    const ClusteringSolution reference =
        cluster::kmeans(z, discovery.chosen_k, params.n_init, params.base_seed);
    std::set<std::string> members;
    for (std::size_t i = 0; i < reference.labels.size(); ++i) {
        if (reference.labels[i] == discovery.chosen_cluster) {
            members.insert(z.sample_ids[i]);
        }
    }
    const std::set<std::string> planted(data.planted_member_ids.begin(),
                                        data.planted_member_ids.end());
    std::size_t inter = 0;
    for (const auto& id : members) inter += planted.count(id);
    const std::size_t uni = members.size() + planted.size() - inter;
    outcome.member_jaccard = uni == 0 ? 0.0 : static_cast<double>(inter) / uni;

    const ClusteringSolution refit =
        stability::final_refit(z, discovery.chosen_k, 30, params.base_seed);
    const LabelAlignment alignment =
        stability::align(reference.labels, refit.labels, discovery.chosen_k);
    for (int j = 0; j < discovery.chosen_k; ++j) {
        if (alignment.run_to_reference[static_cast<std::size_t>(j)] ==
            discovery.chosen_cluster) {
            outcome.refit_rare_cluster = j;
        }
    }
    outcome.refit_labels = refit.labels;
    return outcome;
}

SyntheticSpec planted_spec(double effect, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.n_samples = 150;
    spec.n_genes = 2000;
    spec.n_background_clusters = 3;
    spec.rare_fraction = 0.07;
    spec.n_marker_genes = 60;
    spec.effect_size = effect;
    spec.noise_sigma = 1.0;
    spec.seed = seed;
    return spec;
}

void criterion_2() {
    Timer timer;
    const SyntheticData data = synth::generate(planted_spec(3.0, 1));
    const PipelineOutcome outcome = run_discovery(data, 42);

    report_line("criterion-2 discovery-hit", outcome.found,
                outcome.found ? "rare-and-stable hit at k=" + std::to_string(outcome.chosen_k)
                              : "no hit found");
    report_line("criterion-2 member-jaccard", outcome.member_jaccard >= 0.8,
                "best-hit members vs planted: J = " + fmt(outcome.member_jaccard));

    // DE marker recovery: the planted genes should land in the top 80 rows.
    // 80% of the 60 planted genes (the literal top-80 share is impossible
    // with 60 genes; see README on acceptance).
    bool de_ok = false;
    std::string de_detail = "rare cluster unavailable";
    if (outcome.found && outcome.refit_rare_cluster >= 0) {
        const ExpressionMatrix logged = prep::log1p_transform(data.matrix);
        const ScaledMatrix scaled = prep::standardize(prep::select_hvg(logged, 2000));
        const DeTable table =
            de::de_cluster_vs_rest(scaled, outcome.refit_labels, outcome.refit_rare_cluster);
        const std::set<std::string> planted(data.planted_gene_ids.begin(),
                                            data.planted_gene_ids.end());
        std::size_t hits = 0;
        for (std::size_t i = 0; i < 80 && i < table.rows.size(); ++i) {
            hits += planted.count(table.rows[i].gene_id);
        }
        de_ok = hits >= 48;  // 0.8 * 60
        de_detail = std::to_string(hits) + "/60 planted genes in the top 80 rows";
    }
    report_line("criterion-2 marker-recovery", de_ok, de_detail);

    // null behavior: with effect 0 the planted set is arbitrary; across 10
    // pipeline seeds at most one run may "find" it with J >= 0.8
    const SyntheticData null_data = synth::generate(planted_spec(0.0, 1));
    int null_hits = 0;
    for (std::uint64_t seed = 101; seed <= 110; ++seed) {
        const PipelineOutcome null_outcome = run_discovery(null_data, seed);
        if (null_outcome.found && null_outcome.member_jaccard >= 0.8) ++null_hits;
    }
    report_line("criterion-2 null-behavior", null_hits <= 1,
                std::to_string(null_hits) + "/10 null seeds matched the planted set");

    std::printf("criterion-2 elapsed: %.1fs\n", Timer{timer}.seconds());
}

// ---------- UCI-gated criteria ----------

bool uci_paths(std::string& data_csv, std::string& labels_csv) {
    const char* data_env = std::getenv("RARESUB_UCI_DATA");
    const char* labels_env = std::getenv("RARESUB_UCI_LABELS");
    if (!data_env || !labels_env) return false;
    data_csv = data_env;
    labels_csv = labels_env;
    return fs::exists(data_csv) && fs::exists(labels_csv);
}

constexpr const char* kUciHint =
    "set RARESUB_UCI_DATA and RARESUB_UCI_LABELS to the gene-expression "
    "cancer RNA-seq csv pair (UCI ML repository id 401) to run this criterion";

struct UciPipeline {
    ScaledMatrix scaled;
    LatentMatrix z;
    KScanResult scan;
    std::vector<std::string> class_labels;
};

UciPipeline uci_front(const std::string& data_csv, const std::string& labels_csv,
                      const std::string& class_filter, std::uint64_t seed) {
    ExpressionMatrix matrix = ingest::load_matrix(data_csv, labels_csv);
    if (!class_filter.empty()) matrix = ingest::filter_class(matrix, class_filter);
    UciPipeline out;
    out.class_labels = matrix.class_labels;
    out.scaled = prep::standardize(prep::select_hvg(prep::log1p_transform(matrix), 2000));
    AeConfig cfg;
    cfg.input_dim = static_cast<int>(out.scaled.gene_ids.size());
    cfg.seed = seed;
    const TrainResult trained = ae::train(out.scaled, cfg);
    out.z = ae::encode(trained.model, out.scaled);
    out.scan = cluster::scan_k(out.z, 2, 10, 10, seed);
    return out;
}

void criterion_3() {
    std::string data_csv, labels_csv;
    if (!uci_paths(data_csv, labels_csv)) {
        skip_line("criterion-3", kUciHint);
        return;
    }
    Timer timer;
    const UciPipeline pipe = uci_front(data_csv, labels_csv, "", 42);

    int k_selected = pipe.scan.entries.front().k;
    double best_sil = pipe.scan.entries.front().silhouette;
    for (const KScanEntry& e : pipe.scan.entries) {
        if (e.silhouette > best_sil) {
            best_sil = e.silhouette;
            k_selected = e.k;
        }
    }
    report_line("criterion-3 silhouette-selected-k", k_selected >= 5 && k_selected <= 7,
                "k = " + std::to_string(k_selected) + " (silhouette " + fmt(best_sil) + ")");

    const ClusteringSolution solution = stability::final_refit(pipe.z, k_selected, 30, 42);
    const ContingencyTable table = report::contingency(pipe.class_labels, solution.labels);
    const stats::ContingencyResult chi = stats::chi_square_independence(table.counts);
    report_line("criterion-3 chi-square-underflow", chi.p_value < 1e-300 && chi.p_value > 0.0,
                "p = " + fmt(chi.p_value));
    report_line("criterion-3 cramers-v", chi.cramers_v >= 0.80,
                "V = " + fmt(chi.cramers_v) + " (min(r,c) variant " +
                    fmt(chi.cramers_v_mindim) + ")");

    double min_capture = 1.0;
    for (const auto& row : table.normalized) {
        min_capture = std::min(min_capture, *std::max_element(row.begin(), row.end()));
    }
    report_line("criterion-3 modal-capture", min_capture >= 0.80,
                "worst class captures " + fmt(min_capture) + " in its modal cluster");
    std::printf("criterion-3 elapsed: %.1fs\n", Timer{timer}.seconds());
}

void criterion_4() {
    std::string data_csv, labels_csv;
    if (!uci_paths(data_csv, labels_csv)) {
        skip_line("criterion-4", kUciHint);
        return;
    }
    Timer timer;
    int discoveries = 0;
    bool band_checked = false;
    for (std::uint64_t seed : {42ULL, 43ULL, 44ULL}) {
        const UciPipeline pipe = uci_front(data_csv, labels_csv, "KIRC", seed);
        if (!band_checked) {
            band_checked = true;
            const double sil_k2 = pipe.scan.entries.front().silhouette;
            report_line("criterion-4 silhouette-band", std::fabs(sil_k2 - 0.140) <= 0.07,
                        "silhouette(k=2) = " + fmt(sil_k2) + ", band 0.140 +- 0.07");
            double dbi_k5 = 0.0;
            for (const KScanEntry& e : pipe.scan.entries) {
                if (e.k == 5) dbi_k5 = e.davies_bouldin;
            }
            report_line("criterion-4 dbi-band", std::fabs(dbi_k5 - 2.045) <= 0.5,
                        "DBI(k=5) = " + fmt(dbi_k5) + ", band 2.045 +- 0.5");
        }
        StabilityParams params;
        params.runs = 20;
        params.base_seed = seed;
        params.n_init = 10;
        const DiscoveryReport discovery = stability::discovery_scan(pipe.z, 2, 10, params);
        bool seed_hit = false;
        for (const DiscoveryHit& hit : discovery.hits) {
            if (hit.prevalence >= 0.04 && hit.prevalence <= 0.10 && hit.jaccard >= 0.60) {
                seed_hit = true;
            }
        }
        if (seed_hit) ++discoveries;
    }
    report_line("criterion-4 discovery-rate", discoveries >= 2,
                std::to_string(discoveries) + "/3 seeds found a rare-and-stable cluster in "
                "prevalence band [0.04, 0.10]");
    std::printf("criterion-4 elapsed: %.1fs\n", Timer{timer}.seconds());
}

void criterion_5() {
    Timer timer;
    std::string data_csv, labels_csv;
    ScaledMatrix scaled;
    std::vector<int> labels;
    int rare_cluster = -1;
    std::string source;

    if (uci_paths(data_csv, labels_csv)) {
        source = "UCI KIRC";
        const UciPipeline pipe = uci_front(data_csv, labels_csv, "KIRC", 42);
        StabilityParams params;
        params.runs = 20;
        params.base_seed = 42;
        params.n_init = 10;
        const DiscoveryReport discovery = stability::discovery_scan(pipe.z, 2, 10, params);
        if (!discovery.found) {
            report_line("criterion-5 fixed-membership", false, "no discovery on UCI KIRC");
            return;
        }
        const ClusteringSolution reference =
            cluster::kmeans(pipe.z, discovery.chosen_k, 10, 42);
        const ClusteringSolution refit =
            stability::final_refit(pipe.z, discovery.chosen_k, 30, 42);
        const LabelAlignment alignment =
            stability::align(reference.labels, refit.labels, discovery.chosen_k);
        for (int j = 0; j < discovery.chosen_k; ++j) {
            if (alignment.run_to_reference[static_cast<std::size_t>(j)] ==
                discovery.chosen_cluster) {
                rare_cluster = j;
            }
        }
        scaled = pipe.scaled;
        labels = refit.labels;
    } else {
        source = "planted synthetic cohort (UCI files unavailable; " + std::string(kUciHint) +
                 ")";
        const SyntheticData data = synth::generate(planted_spec(3.0, 1));
        const PipelineOutcome outcome = run_discovery(data, 42);
        if (!outcome.found || outcome.refit_rare_cluster < 0) {
            report_line("criterion-5 fixed-membership", false, "no discovery on synthetic data");
            return;
        }
        scaled = prep::standardize(
            prep::select_hvg(prep::log1p_transform(data.matrix), 2000));
        labels = outcome.refit_labels;
        rare_cluster = outcome.refit_rare_cluster;
    }

    // export the membership the way a run does, reload it, re-run DE twice
    const fs::path dir = scratch_dir("criterion5");
    ClusteringSolution exported;
    exported.k = 1 + *std::max_element(labels.begin(), labels.end());
    exported.labels = labels;
    exported.centroids = Eigen::MatrixXd::Zero(exported.k, 1);
    report::save_clustering_json(exported, scaled.sample_ids,
                                 (dir / "clustering.json").string());
    const auto [loaded, loaded_ids] =
        report::load_clustering_json((dir / "clustering.json").string());
    std::vector<int> reloaded_labels(scaled.sample_ids.size(), -1);
    for (std::size_t i = 0; i < loaded_ids.size(); ++i) {
        for (std::size_t s = 0; s < scaled.sample_ids.size(); ++s) {
            if (scaled.sample_ids[s] == loaded_ids[i]) {
                reloaded_labels[s] = loaded.labels[i];
            }
        }
    }

    const DeTable first = de::de_cluster_vs_rest(scaled, reloaded_labels, rare_cluster);
    const DeTable second = de::de_cluster_vs_rest(scaled, reloaded_labels, rare_cluster);
    bool identical = first.rows.size() == second.rows.size();
    for (std::size_t i = 0; identical && i < first.rows.size(); ++i) {
        identical = first.rows[i].gene_id == second.rows[i].gene_id &&
                    first.rows[i].p_value == second.rows[i].p_value &&
                    first.rows[i].fdr == second.rows[i].fdr &&
                    first.rows[i].effect == second.rows[i].effect;
    }
    report_line("criterion-5 fixed-membership", identical,
                "re-run p/FDR bit-identical on " + source);

    const double top_effect = std::fabs(first.rows.front().effect);
    report_line("criterion-5 top-effect", top_effect >= 1.0,
                "top-FDR gene |effect| = " + fmt(top_effect) + " on " + source);
    std::printf("criterion-5 elapsed: %.1fs\n", Timer{timer}.seconds());
}

void criterion_6() {
    const std::vector<std::vector<double>> table = {{240, 0, 60, 0, 0, 0},
                                                    {0, 0, 0, 0, 0, 78},
                                                    {0, 0, 1, 0, 145, 0},
                                                    {0, 0, 4, 136, 0, 1},
                                                    {0, 136, 0, 0, 0, 0}};
    const stats::ContingencyResult r = stats::chi_square_independence(table);
    // the published statistic normalizes by min(r,c); the min(r-1,c-1)
    // definition gives 0.9914 on the same counts (both are checked)
    const bool published = std::fabs(r.cramers_v_mindim - 0.887) <= 0.001;
    const bool standard = std::fabs(r.cramers_v - 0.9914115908) <= 1e-6;
    report_line("criterion-6 cramers-v-published", published,
                "min(r,c) normalization gives V = " + fmt(r.cramers_v_mindim));
    report_line("criterion-6 cramers-v-standard", standard,
                "min(r-1,c-1) normalization gives V = " + fmt(r.cramers_v));
    report_line("criterion-6 chi-square", std::fabs(r.chi2 - 3149.2018) < 1e-3,
                "chi2 = " + fmt(r.chi2) + ", dof = " + std::to_string(r.dof) +
                    ", p underflows to " + fmt(r.p_value));
}

// ---------- synthetic surrogates for the dataset-gated criteria ----------

void surrogate_pan() {
    Timer timer;
    // five balanced tissue-like classes, no rare subtype
    SyntheticSpec spec;
    spec.n_samples = 400;
    spec.n_genes = 1000;
    spec.n_background_clusters = 5;
    spec.rare_fraction = 0.1;
    spec.n_marker_genes = 0;
    spec.effect_size = 0.0;
    spec.noise_sigma = 1.0;
    spec.seed = 5;
    spec.cohort_label = "";  // classes = background clusters
    const SyntheticData data = synth::generate(spec);

    const ScaledMatrix scaled =
        prep::standardize(prep::select_hvg(prep::log1p_transform(data.matrix), 2000));
    AeConfig cfg;
    cfg.input_dim = static_cast<int>(scaled.gene_ids.size());
    cfg.seed = 42;
    const TrainResult trained = ae::train(scaled, cfg);
    const LatentMatrix z = ae::encode(trained.model, scaled);
    const KScanResult scan = cluster::scan_k(z, 2, 10, 10, 42);

    int k_selected = scan.entries.front().k;
    double best_sil = scan.entries.front().silhouette;
    for (const KScanEntry& e : scan.entries) {
        if (e.silhouette > best_sil) {
            best_sil = e.silhouette;
            k_selected = e.k;
        }
    }
    report_line("surrogate-pan silhouette-selected-k", k_selected == 5,
                "five planted tissues, selected k = " + std::to_string(k_selected));

    const ClusteringSolution solution = stability::final_refit(z, k_selected, 30, 42);
    const ContingencyTable table = report::contingency(data.matrix.class_labels, solution.labels);
    const stats::ContingencyResult chi = stats::chi_square_independence(table.counts);
    report_line("surrogate-pan chi-square-underflow", chi.p_value < 1e-300 && chi.p_value > 0.0,
                "p = " + fmt(chi.p_value));
    report_line("surrogate-pan cramers-v", chi.cramers_v >= 0.80, "V = " + fmt(chi.cramers_v));
    double min_capture = 1.0;
    for (const auto& row : table.normalized) {
        min_capture = std::min(min_capture, *std::max_element(row.begin(), row.end()));
    }
    report_line("surrogate-pan modal-capture", min_capture >= 0.80,
                "worst class modal capture = " + fmt(min_capture));
    std::printf("surrogate-pan elapsed: %.1fs\n", Timer{timer}.seconds());
}

void surrogate_within() {
    Timer timer;
    // KIRC-sized cohort with a planted ~7% subtype, through the run_within
    // pipeline (exercises the file contract end to end)
    const fs::path dir = scratch_dir("surrogate_within");
    SyntheticSpec spec = planted_spec(3.0, 21);
    spec.n_samples = 146;
    const SyntheticData data = synth::generate(spec);
    synth::save(data, (dir / "data.csv").string(), (dir / "labels.csv").string(),
                (dir / "gt.json").string());

    Config cfg;
    cfg.data_csv = (dir / "data.csv").string();
    cfg.labels_csv = (dir / "labels.csv").string();
    cfg.class_filter = "SYNTH";
    cfg.out_root = (dir / "runs").string();
    const std::string run_dir = pipeline::run_within(cfg);

    bool artifacts = true;
    for (const char* name :
         {"kscan.csv", "stability.csv", "discovery.json", "summary.json", "manifest.json"}) {
        artifacts = artifacts && fs::exists(fs::path(run_dir) / name);
    }
    report_line("surrogate-within artifacts", artifacts, "run directory holds the contract files");

    std::ifstream in(fs::path(run_dir) / "summary.json");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string summary = buf.str();
    const bool found = summary.find("\"found\": true") != std::string::npos;
    report_line("surrogate-within discovery", found, "summary.json reports a discovery");

    // prevalence within the rare band
    const auto pos = summary.find("\"prevalence\":");
    double prevalence = -1.0;
    if (pos != std::string::npos) prevalence = std::atof(summary.c_str() + pos + 13);
    report_line("surrogate-within prevalence-band", prevalence >= 0.04 && prevalence <= 0.10,
                "prevalence = " + fmt(prevalence));
    std::printf("surrogate-within elapsed: %.1fs\n", Timer{timer}.seconds());
}

// ---------- CLI end-to-end ----------

struct CliResult {
    int exit_code = -1;
    std::string output;
};

CliResult run_cli(const std::string& cli, const std::string& args) {
    const std::string command = cli + " " + args + " 2>&1";
    CliResult result;
    FILE* pipe = popen(command.c_str(), "r");
    if (!pipe) return result;
    char buffer[4096];
    while (fgets(buffer, sizeof(buffer), pipe)) result.output += buffer;
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string first_line(const std::string& text) {
    const auto pos = text.find('\n');
    return pos == std::string::npos ? text : text.substr(0, pos);
}

void cli_e2e() {
    const char* cli_env = std::getenv("RARESUB_CLI");
    if (!cli_env || !fs::exists(cli_env)) {
        skip_line("cli-e2e", "RARESUB_CLI does not point at the built binary");
        return;
    }
    Timer timer;
    const std::string cli = cli_env;
    const fs::path dir = scratch_dir("cli_e2e");
    const fs::path out = dir / "runs";

    std::ofstream(dir / "spec.json")
        << "{\"n_samples\":150,\"n_genes\":2000,\"n_background_clusters\":3,"
           "\"rare_fraction\":0.07,\"n_marker_genes\":60,\"effect_size\":3.0,"
           "\"noise_sigma\":1.0,\"seed\":1}";
    std::ofstream(dir / "cfg.json")
        << "{\"autoencoder\":{\"latent_dim\":128},\"clustering\":{\"k_min\":2,\"k_max\":10},"
           "\"stability\":{\"runs\":20}}";

    const CliResult synth_result = run_cli(
        cli, "synth --spec " + (dir / "spec.json").string() + " --out " + out.string());
    report_line("cli-e2e synth", synth_result.exit_code == 0,
                "exit " + std::to_string(synth_result.exit_code));
    if (synth_result.exit_code != 0) return;
    const std::string synth_dir = first_line(synth_result.output);

    const CliResult within_result = run_cli(
        cli, "within --class SYNTH --config " + (dir / "cfg.json").string() + " --data " +
                 synth_dir + "/data.csv --labels " + synth_dir + "/labels.csv --out " +
                 out.string() + " --seed 42");
    report_line("cli-e2e within", within_result.exit_code == 0,
                "exit " + std::to_string(within_result.exit_code));
    if (within_result.exit_code != 0) {
        std::printf("%s\n", within_result.output.c_str());
        return;
    }
    const std::string within_dir = first_line(within_result.output);

    std::ifstream discovery_in(fs::path(within_dir) / "discovery.json");
    std::ostringstream discovery_buf;
    discovery_buf << discovery_in.rdbuf();
    report_line("cli-e2e discovery-nonempty",
                discovery_buf.str().find("\"found\": true") != std::string::npos,
                "within run on a planted cohort discovers the subtype");

    // summary tells us which cluster to contrast
    std::ifstream summary_in(fs::path(within_dir) / "summary.json");
    std::ostringstream summary_buf;
    summary_buf << summary_in.rdbuf();
    int rare_cluster = -1;
    const auto pos = summary_buf.str().find("\"rare_cluster\":");
    if (pos != std::string::npos) rare_cluster = std::atoi(summary_buf.str().c_str() + pos + 15);

    const CliResult de_result = run_cli(
        cli, "de --class SYNTH --cluster " + std::to_string(rare_cluster) + " --assignments " +
                 within_dir + "/clustering.json --data " + synth_dir + "/data.csv --labels " +
                 synth_dir + "/labels.csv --out " + out.string());
    report_line("cli-e2e de", de_result.exit_code == 0,
                "exit " + std::to_string(de_result.exit_code));

    const CliResult report_result =
        run_cli(cli, "report --run " + within_dir + " --out " + out.string());
    report_line("cli-e2e report", report_result.exit_code == 0,
                "exit " + std::to_string(report_result.exit_code));

    // distinct exit codes: usage vs config vs data
    const CliResult usage = run_cli(cli, "within");
    report_line("cli-e2e usage-exit", usage.exit_code == 1,
                "missing required flags exits 1 (got " + std::to_string(usage.exit_code) + ")");
    const CliResult bad_config =
        run_cli(cli, "within --class X --config " + (dir / "spec_missing.json").string());
    report_line("cli-e2e config-exit", bad_config.exit_code == 2,
                "unreadable config exits 2 (got " + std::to_string(bad_config.exit_code) + ")");
    const CliResult bad_data = run_cli(
        cli, "within --class X --data /nonexistent/a.csv --labels /nonexistent/b.csv --out " +
                 out.string());
    report_line("cli-e2e data-exit", bad_data.exit_code == 3,
                "missing data exits 3 (got " + std::to_string(bad_data.exit_code) + ")");

    std::printf("cli-e2e elapsed: %.1fs\n", Timer{timer}.seconds());
}

}  // namespace

void run_guarded(const std::string& name, void (*criterion)()) {
    try {
        criterion();
    } catch (const std::exception& e) {
        report_line(name, false, std::string("unhandled error: ") + e.what());
    }
}

int main(int argc, char** argv) {
    const std::string which = argc > 1 ? argv[1] : "all";
    if (which == "1" || which == "all") run_guarded("criterion-1", criterion_1);
    if (which == "2" || which == "all") run_guarded("criterion-2", criterion_2);
    if (which == "3" || which == "all") run_guarded("criterion-3", criterion_3);
    if (which == "4" || which == "all") run_guarded("criterion-4", criterion_4);
    if (which == "5" || which == "all") run_guarded("criterion-5", criterion_5);
    if (which == "6" || which == "all") run_guarded("criterion-6", criterion_6);
    if (which == "surrogate-pan" || which == "all") run_guarded("surrogate-pan", surrogate_pan);
    if (which == "surrogate-within" || which == "all") {
        run_guarded("surrogate-within", surrogate_within);
    }
    if (which == "cli-e2e" || which == "all") run_guarded("cli-e2e", cli_e2e);

    if (g_failures > 0) {
        std::printf("%d acceptance check(s) failed\n", g_failures);
        return 1;
    }
    return 0;
}
