#ifndef RARESUB_REPORT_HPP
#define RARESUB_REPORT_HPP

#include <string>
#include <vector>

#include "raresub/clustering.hpp"
#include "raresub/diffexpr.hpp"
#include "raresub/stability.hpp"
#include "raresub/stats.hpp"

namespace raresub {

struct ContingencyTable {
    std::vector<std::string> row_labels;  // classes, sorted
    std::vector<int> col_labels;          // cluster ids
    std::vector<std::vector<double>> counts;
    std::vector<std::vector<double>> normalized;  // each row sums to 1
};

namespace report {

// Class-by-cluster counts plus row-normalized proportions.
ContingencyTable contingency(const std::vector<std::string>& class_labels,
                             const std::vector<int>& cluster_labels);

void save_contingency_csv(const ContingencyTable& table, const std::string& path);

// Top-2 principal components of the latent matrix; each component's sign is
// fixed by making its largest-magnitude loading positive.
Eigen::MatrixXd pca2(const Eigen::MatrixXd& z);

// Every figure writes an SVG and a CSV twin with the plotted numbers.
void figure_metric_curve(const KScanResult& scan, bool silhouette, const std::string& svg_path,
                         const std::string& csv_path);
void figure_cluster_sizes(const std::vector<std::size_t>& sizes, int k, int rare_cluster,
                          const std::string& svg_path, const std::string& csv_path);
void figure_stability_bars(const std::vector<ClusterStability>& rows, int k, int rare_cluster,
                           double threshold, const std::string& svg_path,
                           const std::string& csv_path);
void figure_volcano(const std::vector<VolcanoPoint>& points, const std::string& svg_path,
                    const std::string& csv_path);
void figure_heatmap(const HeatmapData& heatmap, const std::string& svg_path,
                    const std::string& csv_path);
void figure_latent_scatter(const LatentMatrix& z, const std::vector<int>& labels,
                           int highlight_cluster, const std::string& svg_path,
                           const std::string& csv_path);

// Mean separation of one cluster: nearest other-centroid distance divided by
// the cluster's mean member-to-centroid distance.
double cluster_separation(const LatentMatrix& z, const std::vector<int>& labels, int cluster_id);

void save_kscan_csv(const KScanResult& scan, const std::string& path);
KScanResult load_kscan_csv(const std::string& path);
void save_stability_csv(const std::vector<ClusterStability>& rows, const std::string& path);
std::vector<ClusterStability> load_stability_csv(const std::string& path);
void save_clustering_json(const ClusteringSolution& solution,
                          const std::vector<std::string>& sample_ids, const std::string& path);
// Returns the solution plus the sample ids in file order.
std::pair<ClusteringSolution, std::vector<std::string>> load_clustering_json(
    const std::string& path);
void save_latent_csv(const LatentMatrix& z, const std::string& path);
LatentMatrix load_latent_csv(const std::string& path);

}  // namespace report
}  // namespace raresub

#endif
