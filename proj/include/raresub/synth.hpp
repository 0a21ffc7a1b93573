#ifndef RARESUB_SYNTH_HPP
#define RARESUB_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "raresub/ingest.hpp"

namespace raresub {

struct SyntheticSpec {
    std::size_t n_samples = 150;
    std::size_t n_genes = 2000;
    std::size_t n_background_clusters = 3;
    double rare_fraction = 0.07;      // in (0, 0.1]
    std::size_t n_marker_genes = 60;  // split evenly into up/down shifts
    double effect_size = 3.0;         // z-units in log space
    double noise_sigma = 1.0;
    std::uint64_t seed = 1;
    // Class column value for every sample (one analysable cohort). Set empty
    // to expose the background clusters as classes (pan-style control data).
    std::string cohort_label = "SYNTH";

    std::size_t rare_size() const;  // round(rare_fraction * n_samples)
};

struct SyntheticData {
    ExpressionMatrix matrix;               // class label = background cluster name
    std::vector<int> ground_truth_labels;  // background cluster per sample
    std::vector<std::string> planted_member_ids;
    std::vector<std::string> planted_gene_ids;
    Eigen::MatrixXd log_signal;  // noiseless log-space signal, samples x genes
    SyntheticSpec spec;
};

namespace synth {

// Background clusters are Gaussian bumps on disjoint gene blocks; the rare
// subtype is carved out of background cluster 0 and shifted by +-effect_size
// on the marker genes (first half up, second half down). Values are
// exponentiated and shifted so the matrix is non-negative and the full
// log1p -> HVG -> z-score pipeline applies. Fully determined by spec.seed
// (PCG32 stream, Box-Muller normals).
SyntheticData generate(const SyntheticSpec& spec);

void save(const SyntheticData& data, const std::string& data_csv, const std::string& labels_csv,
          const std::string& ground_truth_json);

}  // namespace synth
}  // namespace raresub

#endif
