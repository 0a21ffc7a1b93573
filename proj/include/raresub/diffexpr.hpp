#ifndef RARESUB_DIFFEXPR_HPP
#define RARESUB_DIFFEXPR_HPP

#include <string>
#include <vector>

#include "raresub/preprocess.hpp"
#include "raresub/stats.hpp"

namespace raresub {

struct DeRow {
    std::string gene_id;
    double effect = 0.0;  // mean(in) - mean(out), z-score units
    double t_stat = 0.0;
    double df = 0.0;
    double p_value = 1.0;
    double fdr = 1.0;
};

// Rows sorted by ascending fdr, ties by descending |effect|, then gene_id.
struct DeTable {
    std::vector<DeRow> rows;
};

struct MarkerSelection {
    std::vector<std::string> top_up;    // largest positive effects, significant
    std::vector<std::string> top_down;  // most negative effects, significant
    std::size_t requested = 20;
    bool shortfall = false;  // fewer significant genes than requested on a side
};

struct VolcanoPoint {
    std::string gene_id;
    double effect = 0.0;
    double neg_log10_fdr = 0.0;  // clamped at 320
    bool highlighted = false;
};

struct HeatmapData {
    std::vector<std::string> gene_ids;    // top_down rows first, then top_up
    std::vector<std::string> sample_ids;  // in-cluster first, original order kept
    std::size_t n_in_cluster = 0;
    Eigen::MatrixXd values;  // genes x samples, raw z-scores
};

namespace de {

// Welch's t per gene on the standardized matrix for members of cluster_id vs
// everyone else, BH across all genes jointly.
DeTable de_cluster_vs_rest(const ScaledMatrix& xz, const std::vector<int>& labels, int cluster_id);

MarkerSelection select_markers(const DeTable& table, double fdr_threshold, std::size_t top_n);

std::vector<VolcanoPoint> volcano_data(const DeTable& table, double fdr_threshold,
                                       double effect_threshold);

HeatmapData heatmap_data(const ScaledMatrix& xz, const std::vector<int>& labels, int cluster_id,
                         const MarkerSelection& markers);

void save_de_csv(const DeTable& table, const std::string& path);
DeTable load_de_csv(const std::string& path);

}  // namespace de
}  // namespace raresub

#endif
