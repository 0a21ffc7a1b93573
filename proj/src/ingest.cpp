#include "raresub/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "raresub/csv.hpp"
#include "raresub/error.hpp"

namespace raresub::ingest {

namespace {

bool is_id_header(const std::string& name) {
    return name.empty() || name == "id" || name == "Id" || name == "ID";
}

// Labels CSV -> id -> class. Requires a "Class" column; the id column is the
// first one. Extra columns are ignored.
std::unordered_map<std::string, std::string> read_labels(const std::string& path) {
    csv::Table table = csv::read_file(path);
    if (table.rows.empty()) {
        throw Error(ErrorCode::MalformedHeader, "labels file '" + path + "' is empty");
    }
    const auto& header = table.rows.front();
    if (header.size() < 2) {
        throw Error(ErrorCode::MalformedHeader,
                    "labels file '" + path + "' needs an id column and a Class column");
    }
    std::size_t class_col = header.size();
    for (std::size_t j = 1; j < header.size(); ++j) {
        if (header[j] == "Class") {
            class_col = j;
            break;
        }
    }
    if (class_col == header.size()) {
        throw Error(ErrorCode::MalformedHeader, "labels file '" + path + "' has no Class column");
    }

    std::unordered_map<std::string, std::string> labels;
    labels.reserve(table.rows.size());
    for (std::size_t r = 1; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row.size() != header.size()) {
            throw Error(ErrorCode::MalformedHeader,
                        "labels row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                            " fields, expected " + std::to_string(header.size()));
        }
        const std::string& id = row[0];
        if (!labels.emplace(id, row[class_col]).second) {
            throw Error(ErrorCode::DuplicateSampleId, "labels file repeats id '" + id + "'");
        }
    }
    return labels;
}

}  // namespace

ExpressionMatrix load_matrix(const std::string& data_path, const std::string& labels_path,
                             LoadReport* report) {
    std::unordered_map<std::string, std::string> labels = read_labels(labels_path);

    csv::NumericTable table = csv::read_numeric_file(data_path);
    if (!is_id_header(table.header[0])) {
        throw Error(ErrorCode::MalformedHeader,
                    "data file first column must be the sample id (blank or 'id' header), got '" +
                        table.header[0] + "'");
    }

    const std::size_t n_genes = table.header.size() - 1;
    std::vector<std::string> gene_ids(table.header.begin() + 1, table.header.end());
    {
        std::unordered_set<std::string> seen;
        seen.reserve(n_genes);
        for (const auto& g : gene_ids) {
            if (g.empty()) {
                throw Error(ErrorCode::MalformedHeader, "empty gene column name");
            }
            if (!seen.insert(g).second) {
                throw Error(ErrorCode::DuplicateGeneId, "gene column '" + g + "' appears twice");
            }
        }
    }

    // pick the joined rows in data-file order
    std::vector<std::size_t> kept_rows;
    std::vector<std::string> sample_ids;
    kept_rows.reserve(table.rows.size());
    std::unordered_set<std::string> seen_ids;
    seen_ids.reserve(table.rows.size());
    std::size_t dropped_data_only = 0;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::string& id = table.row_ids[r];
        if (!seen_ids.insert(id).second) {
            throw Error(ErrorCode::DuplicateSampleId, "data file repeats id '" + id + "'");
        }
        if (labels.count(id) == 0) {
            ++dropped_data_only;
            continue;
        }
        kept_rows.push_back(r);
        sample_ids.push_back(id);
    }
    if (kept_rows.empty()) {
        throw Error(ErrorCode::EmptyJoin, "no sample ids shared between '" + data_path + "' and '" +
                                              labels_path + "'");
    }

    ExpressionMatrix m;
    m.sample_ids = std::move(sample_ids);
    m.gene_ids = std::move(gene_ids);
    m.values.resize(static_cast<Eigen::Index>(kept_rows.size()),
                    static_cast<Eigen::Index>(n_genes));
    m.class_labels.reserve(kept_rows.size());
    for (std::size_t i = 0; i < kept_rows.size(); ++i) {
        const std::vector<double>& row = table.rows[kept_rows[i]];
        for (std::size_t j = 0; j < n_genes; ++j) {
            m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
        }
        m.class_labels.push_back(labels.at(m.sample_ids[i]));
    }

    if (report) {
        *report = LoadReport{};
        report->n_samples = m.n_samples();
        report->n_genes = m.n_genes();
        for (const auto& c : m.class_labels) ++report->class_counts[c];
        report->violations = validate(m);
        report->dropped_data_only = dropped_data_only;
        report->dropped_labels_only = labels.size() - m.n_samples();
    }
    return m;
}

ExpressionMatrix filter_class(const ExpressionMatrix& m, const std::string& class_name) {
    if (!m.has_labels()) {
        throw Error(ErrorCode::UnknownClass, "matrix has no class labels to filter on");
    }
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < m.class_labels.size(); ++i) {
        if (m.class_labels[i] == class_name) keep.push_back(i);
    }
    if (keep.empty()) {
        throw Error(ErrorCode::UnknownClass, "class '" + class_name + "' matches no samples");
    }
    ExpressionMatrix out;
    out.gene_ids = m.gene_ids;
    out.sample_ids.reserve(keep.size());
    out.class_labels.reserve(keep.size());
    out.values.resize(static_cast<Eigen::Index>(keep.size()), m.values.cols());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        out.sample_ids.push_back(m.sample_ids[keep[i]]);
        out.class_labels.push_back(m.class_labels[keep[i]]);
        out.values.row(static_cast<Eigen::Index>(i)) =
            m.values.row(static_cast<Eigen::Index>(keep[i]));
    }
    return out;
}

ValidationSummary validate(const ExpressionMatrix& m) {
    ValidationSummary s;
    const double* data = m.values.data();
    const std::size_t n = static_cast<std::size_t>(m.values.size());
    for (std::size_t i = 0; i < n; ++i) {
        double v = data[i];
        if (std::isnan(v)) {
            ++s.nan_count;
        } else if (std::isinf(v)) {
            ++s.inf_count;
        } else if (v < 0.0) {
            ++s.negative_count;
        }
    }
    return s;
}

void save_matrix(const ExpressionMatrix& m, const std::string& data_path,
                 const std::string& labels_path) {
    std::string data;
    data.reserve(m.n_samples() * (m.n_genes() * 8 + 16));
    for (const auto& g : m.gene_ids) {
        data += ',';
        data += csv::escape_field(g);
    }
    data += '\n';
    for (std::size_t i = 0; i < m.n_samples(); ++i) {
        data += csv::escape_field(m.sample_ids[i]);
        for (std::size_t j = 0; j < m.n_genes(); ++j) {
            data += ',';
            data += csv::format_double(
                m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        }
        data += '\n';
    }
    csv::write_file(data_path, data);

    std::string labels = ",Class\n";
    for (std::size_t i = 0; i < m.n_samples(); ++i) {
        labels += csv::escape_field(m.sample_ids[i]);
        labels += ',';
        labels += csv::escape_field(m.has_labels() ? m.class_labels[i] : std::string());
        labels += '\n';
    }
    csv::write_file(labels_path, labels);
}

std::string load_report_json(const LoadReport& report) {
    nlohmann::json j;
    j["n_samples"] = report.n_samples;
    j["n_genes"] = report.n_genes;
    j["class_counts"] = report.class_counts;
    j["violations"] = {{"nan", report.violations.nan_count},
                       {"inf", report.violations.inf_count},
                       {"negative", report.violations.negative_count}};
    j["dropped_data_only"] = report.dropped_data_only;
    j["dropped_labels_only"] = report.dropped_labels_only;
    return j.dump(2) + "\n";
}

}  // namespace raresub::ingest
