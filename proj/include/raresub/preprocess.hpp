#ifndef RARESUB_PREPROCESS_HPP
#define RARESUB_PREPROCESS_HPP

#include <string>
#include <vector>

#include "raresub/ingest.hpp"

namespace raresub {

// Gene-standardized matrix: every column has mean 0 and (population) std 1.
// Means/stds are kept so values can be mapped back to the selected-gene scale.
struct ScaledMatrix {
    std::vector<std::string> sample_ids;
    std::vector<std::string> gene_ids;  // selected genes, variance-descending
    Eigen::MatrixXd values;
    std::vector<double> per_gene_mean;
    std::vector<double> per_gene_std;
};

namespace prep {

// x -> ln(1+x) elementwise; rejects negative input.
ExpressionMatrix log1p_transform(const ExpressionMatrix& m);

// Keeps the min(top_n, #genes with variance > 0) genes with the largest
// population variance. Output order is variance-descending; ties keep the
// smaller original column index first. Zero-variance genes are never kept.
ExpressionMatrix select_hvg(const ExpressionMatrix& m, std::size_t top_n);

// Column-wise z-scoring with population std (divide by n).
ScaledMatrix standardize(const ExpressionMatrix& m);

// Population variance of every column, fixed summation order.
std::vector<double> column_variances(const Eigen::MatrixXd& values);

void save_scaled(const ScaledMatrix& s, const std::string& csv_path,
                 const std::string& sidecar_json_path);
ScaledMatrix load_scaled(const std::string& csv_path, const std::string& sidecar_json_path);

}  // namespace prep
}  // namespace raresub

#endif
