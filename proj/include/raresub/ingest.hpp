#ifndef RARESUB_INGEST_HPP
#define RARESUB_INGEST_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace raresub {

// Samples x genes expression matrix with row/column identity and optional
// class labels. Immutable once built; every transform returns a new matrix.
struct ExpressionMatrix {
    std::vector<std::string> sample_ids;
    std::vector<std::string> gene_ids;
    Eigen::MatrixXd values;  // rows = samples, cols = genes
    std::vector<std::string> class_labels;  // empty or aligned to sample_ids

    std::size_t n_samples() const { return sample_ids.size(); }
    std::size_t n_genes() const { return gene_ids.size(); }
    bool has_labels() const { return !class_labels.empty(); }
};

struct ValidationSummary {
    std::size_t nan_count = 0;
    std::size_t inf_count = 0;
    std::size_t negative_count = 0;

    bool clean() const { return nan_count == 0 && inf_count == 0 && negative_count == 0; }
};

struct LoadReport {
    std::size_t n_samples = 0;
    std::size_t n_genes = 0;
    std::map<std::string, std::size_t> class_counts;
    ValidationSummary violations;
    std::size_t dropped_data_only = 0;    // rows only in the data file
    std::size_t dropped_labels_only = 0;  // rows only in the labels file
};

namespace ingest {

// Inner join of the data and labels CSVs on the sample-id column (first
// column of each file, header may be blank or "id"); output sample order
// follows the data file. Labels file must have a "Class" column.
ExpressionMatrix load_matrix(const std::string& data_path, const std::string& labels_path,
                             LoadReport* report = nullptr);

// Keeps rows whose class equals class_name, original order, genes untouched.
ExpressionMatrix filter_class(const ExpressionMatrix& m, const std::string& class_name);

// Counts NaN / infinite / negative entries; never mutates, never throws.
ValidationSummary validate(const ExpressionMatrix& m);

// Snapshot in the same two-file format load_matrix reads. Values are written
// in shortest round-trip decimal form, so save-then-load is exact.
void save_matrix(const ExpressionMatrix& m, const std::string& data_path,
                 const std::string& labels_path);

std::string load_report_json(const LoadReport& report);

}  // namespace ingest
}  // namespace raresub

#endif
