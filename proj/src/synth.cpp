#include "raresub/synth.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "raresub/csv.hpp"
#include "raresub/error.hpp"
#include "raresub/rng.hpp"

namespace raresub {

std::size_t SyntheticSpec::rare_size() const {
    return static_cast<std::size_t>(
        std::llround(rare_fraction * static_cast<double>(n_samples)));
}

namespace synth {

namespace {

constexpr double kBaseLevel = 4.0;    // log-space baseline
constexpr double kClusterBump = 2.0;  // background separation amplitude

// genes per background block: half the genome split across the blocks,
// clamped to [5, 400]. Keeps most selected genes structured, the way a
// highly-variable-gene panel looks on real cohorts.
std::size_t block_genes_for(const SyntheticSpec& spec) {
    const std::size_t target = spec.n_genes / (2 * spec.n_background_clusters);
    return std::clamp<std::size_t>(target, 5, 400);
}

}  // namespace

SyntheticData generate(const SyntheticSpec& spec) {
    if (!(spec.rare_fraction > 0.0 && spec.rare_fraction <= 0.1)) {
        throw Error(ErrorCode::InfeasibleSpec, "rare_fraction must be in (0, 0.1]");
    }
    if (spec.n_background_clusters < 2) {
        throw Error(ErrorCode::InfeasibleSpec, "need >= 2 background clusters");
    }
    if (spec.noise_sigma < 0.0 || spec.effect_size < 0.0) {
        throw Error(ErrorCode::InfeasibleSpec, "negative noise_sigma or effect_size");
    }
    const std::size_t rare = spec.rare_size();
    if (rare < 3) {
        throw Error(ErrorCode::InfeasibleSpec,
                    "rare cluster would have " + std::to_string(rare) + " members, need >= 3");
    }
    const std::size_t block_genes = block_genes_for(spec);
    const std::size_t background_genes = spec.n_background_clusters * block_genes;
    if (background_genes + spec.n_marker_genes > spec.n_genes) {
        throw Error(ErrorCode::InfeasibleSpec, "not enough genes for background blocks + markers");
    }
    if (rare + 2 > spec.n_samples / spec.n_background_clusters) {
        throw Error(ErrorCode::InfeasibleSpec, "rare cluster does not fit inside background 0");
    }

    SyntheticData data;
    data.spec = spec;

    const std::size_t n = spec.n_samples;
    const std::size_t g = spec.n_genes;

    // background assignment: round-robin keeps sizes within 1 of each other
    data.ground_truth_labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        data.ground_truth_labels[i] = static_cast<int>(i % spec.n_background_clusters);
    }

    // rare members: the first `rare` samples of background cluster 0
    std::vector<bool> is_rare(n, false);
    std::size_t placed = 0;
    for (std::size_t i = 0; i < n && placed < rare; ++i) {
        if (data.ground_truth_labels[i] == 0) {
            is_rare[i] = true;
            ++placed;
        }
    }

    data.matrix.sample_ids.resize(n);
    data.matrix.class_labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        data.matrix.sample_ids[i] = "sample_" + std::to_string(i);
        data.matrix.class_labels[i] =
            spec.cohort_label.empty() ? "SYN" + std::to_string(data.ground_truth_labels[i])
                                      : spec.cohort_label;
        if (is_rare[i]) data.planted_member_ids.push_back(data.matrix.sample_ids[i]);
    }
    data.matrix.gene_ids.resize(g);
    for (std::size_t j = 0; j < g; ++j) {
        data.matrix.gene_ids[j] = "gene_" + std::to_string(j);
    }

    // gene layout: [background blocks][marker genes][noise-only genes]
    const std::size_t marker_begin = background_genes;
    for (std::size_t j = 0; j < spec.n_marker_genes; ++j) {
        data.planted_gene_ids.push_back(data.matrix.gene_ids[marker_begin + j]);
    }

    data.log_signal.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(g));
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t block = static_cast<std::size_t>(data.ground_truth_labels[i]);
        for (std::size_t j = 0; j < g; ++j) {
            double v = kBaseLevel;
            if (j < background_genes && j / block_genes == block) {
                v += kClusterBump;
            }
            if (is_rare[i] && j >= marker_begin && j < marker_begin + spec.n_marker_genes) {
                const bool up = (j - marker_begin) < spec.n_marker_genes / 2;
                v += up ? spec.effect_size : -spec.effect_size;
            }
            data.log_signal(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    }

    // noise in log space, then x = exp(v) shifted so the minimum lands at 0
    Pcg32 rng(spec.seed);
    Eigen::MatrixXd noisy = data.log_signal;
    for (Eigen::Index i = 0; i < noisy.rows(); ++i) {
        for (Eigen::Index j = 0; j < noisy.cols(); ++j) {
            noisy(i, j) += spec.noise_sigma * rng.next_gaussian();
        }
    }
    Eigen::MatrixXd expd = noisy.array().exp();
    const double min_value = expd.minCoeff();
    data.matrix.values = (expd.array() - min_value).cwiseMax(0.0);
    return data;
}

void save(const SyntheticData& data, const std::string& data_csv, const std::string& labels_csv,
          const std::string& ground_truth_json) {
    ingest::save_matrix(data.matrix, data_csv, labels_csv);

    nlohmann::json j;
    j["member_ids"] = data.planted_member_ids;
    j["marker_gene_ids"] = data.planted_gene_ids;
    j["spec"] = {{"n_samples", data.spec.n_samples},
                 {"n_genes", data.spec.n_genes},
                 {"n_background_clusters", data.spec.n_background_clusters},
                 {"rare_fraction", data.spec.rare_fraction},
                 {"n_marker_genes", data.spec.n_marker_genes},
                 {"effect_size", data.spec.effect_size},
                 {"noise_sigma", data.spec.noise_sigma},
                 {"seed", data.spec.seed},
                 {"cohort_label", data.spec.cohort_label},
                 {"background_labels", data.ground_truth_labels}};
    csv::write_file(ground_truth_json, j.dump(2) + "\n");
}

}  // namespace synth
}  // namespace raresub
