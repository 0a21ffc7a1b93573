#include "raresub/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "raresub/csv.hpp"
#include "raresub/error.hpp"

namespace raresub::prep {

ExpressionMatrix log1p_transform(const ExpressionMatrix& m) {
    ExpressionMatrix out;
    out.sample_ids = m.sample_ids;
    out.gene_ids = m.gene_ids;
    out.class_labels = m.class_labels;
    out.values.resize(m.values.rows(), m.values.cols());
    const double* src = m.values.data();
    double* dst = out.values.data();
    const std::size_t n = static_cast<std::size_t>(m.values.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (src[i] < 0.0) {
            throw Error(ErrorCode::NegativeInput,
                        "log1p input has negative value " + std::to_string(src[i]));
        }
        dst[i] = std::log1p(src[i]);
    }
    return out;
}

std::vector<double> column_variances(const Eigen::MatrixXd& values) {
    const Eigen::Index rows = values.rows();
    const Eigen::Index cols = values.cols();
    std::vector<double> variances(static_cast<std::size_t>(cols), 0.0);
    const double inv_n = 1.0 / static_cast<double>(rows);
    for (Eigen::Index j = 0; j < cols; ++j) {
        double mean = 0.0;
        for (Eigen::Index i = 0; i < rows; ++i) mean += values(i, j);
        mean *= inv_n;
        double ss = 0.0;
        for (Eigen::Index i = 0; i < rows; ++i) {
            double d = values(i, j) - mean;
            ss += d * d;
        }
        variances[static_cast<std::size_t>(j)] = ss * inv_n;
    }
    return variances;
}

ExpressionMatrix select_hvg(const ExpressionMatrix& m, std::size_t top_n) {
    if (top_n == 0) {
        throw Error(ErrorCode::InvalidArgument, "top_n must be >= 1");
    }
    std::vector<double> variances = column_variances(m.values);

    std::vector<std::size_t> order(variances.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return variances[a] > variances[b];
    });

    std::size_t usable = 0;
    for (std::size_t idx : order) {
        if (variances[idx] > 0.0) ++usable;
    }
    if (usable == 0) {
        throw Error(ErrorCode::NoVariableGenes, "every gene is constant");
    }
    const std::size_t keep = std::min(top_n, usable);

    ExpressionMatrix out;
    out.sample_ids = m.sample_ids;
    out.class_labels = m.class_labels;
    out.gene_ids.reserve(keep);
    out.values.resize(m.values.rows(), static_cast<Eigen::Index>(keep));
    for (std::size_t j = 0; j < keep; ++j) {
        out.gene_ids.push_back(m.gene_ids[order[j]]);
        out.values.col(static_cast<Eigen::Index>(j)) =
            m.values.col(static_cast<Eigen::Index>(order[j]));
    }
    return out;
}

ScaledMatrix standardize(const ExpressionMatrix& m) {
    const Eigen::Index rows = m.values.rows();
    const Eigen::Index cols = m.values.cols();
    ScaledMatrix out;
    out.sample_ids = m.sample_ids;
    out.gene_ids = m.gene_ids;
    out.values.resize(rows, cols);
    out.per_gene_mean.resize(static_cast<std::size_t>(cols));
    out.per_gene_std.resize(static_cast<std::size_t>(cols));

    const double inv_n = 1.0 / static_cast<double>(rows);
    for (Eigen::Index j = 0; j < cols; ++j) {
        double mean = 0.0;
        for (Eigen::Index i = 0; i < rows; ++i) mean += m.values(i, j);
        mean *= inv_n;
        double ss = 0.0;
        for (Eigen::Index i = 0; i < rows; ++i) {
            double d = m.values(i, j) - mean;
            ss += d * d;
        }
        double std = std::sqrt(ss * inv_n);
        if (!(std > 0.0)) {
            throw Error(ErrorCode::ZeroVarianceColumn,
                        "gene '" + m.gene_ids[static_cast<std::size_t>(j)] + "' is constant");
        }
        const double inv_std = 1.0 / std;
        for (Eigen::Index i = 0; i < rows; ++i) {
            out.values(i, j) = (m.values(i, j) - mean) * inv_std;
        }
        out.per_gene_mean[static_cast<std::size_t>(j)] = mean;
        out.per_gene_std[static_cast<std::size_t>(j)] = std;
    }
    return out;
}

void save_scaled(const ScaledMatrix& s, const std::string& csv_path,
                 const std::string& sidecar_json_path) {
    std::string data;
    data.reserve(s.sample_ids.size() * (s.gene_ids.size() * 8 + 16));
    for (const auto& g : s.gene_ids) {
        data += ',';
        data += csv::escape_field(g);
    }
    data += '\n';
    for (std::size_t i = 0; i < s.sample_ids.size(); ++i) {
        data += csv::escape_field(s.sample_ids[i]);
        for (std::size_t j = 0; j < s.gene_ids.size(); ++j) {
            data += ',';
            data += csv::format_double(
                s.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        }
        data += '\n';
    }
    csv::write_file(csv_path, data);

    nlohmann::json j;
    j["selected_genes"] = s.gene_ids;
    j["means"] = s.per_gene_mean;
    j["stds"] = s.per_gene_std;
    csv::write_file(sidecar_json_path, j.dump(2) + "\n");
}

ScaledMatrix load_scaled(const std::string& csv_path, const std::string& sidecar_json_path) {
    csv::Table table = csv::read_file(csv_path);
    if (table.rows.size() < 2) {
        throw Error(ErrorCode::MalformedHeader, "scaled matrix '" + csv_path + "' is empty");
    }
    const auto& header = table.rows.front();
    ScaledMatrix s;
    s.gene_ids.assign(header.begin() + 1, header.end());
    const std::size_t n_rows = table.rows.size() - 1;
    s.values.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(s.gene_ids.size()));
    for (std::size_t i = 0; i < n_rows; ++i) {
        const auto& row = table.rows[i + 1];
        if (row.size() != header.size()) {
            throw Error(ErrorCode::MalformedHeader, "scaled matrix row width mismatch");
        }
        s.sample_ids.push_back(row[0]);
        for (std::size_t j = 0; j + 1 < row.size(); ++j) {
            s.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                csv::parse_double(row[j + 1], i + 1, j + 1);
        }
    }

    std::ifstream in(sidecar_json_path);
    if (!in) {
        throw Error(ErrorCode::MissingFile, "cannot open '" + sidecar_json_path + "'");
    }
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        throw Error(ErrorCode::MalformedJson, "invalid JSON in '" + sidecar_json_path + "'");
    }
    s.per_gene_mean = j.at("means").get<std::vector<double>>();
    s.per_gene_std = j.at("stds").get<std::vector<double>>();
    return s;
}

}  // namespace raresub::prep
