#include "raresub/diffexpr.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "raresub/csv.hpp"
#include "raresub/error.hpp"

namespace raresub::de {

DeTable de_cluster_vs_rest(const ScaledMatrix& xz, const std::vector<int>& labels,
                           int cluster_id) {
    const std::size_t n = xz.sample_ids.size();
    if (labels.size() != n) {
        throw Error(ErrorCode::LengthMismatch, "labels length != sample count");
    }
    std::vector<Eigen::Index> in_rows, out_rows;
    for (std::size_t i = 0; i < n; ++i) {
        (labels[i] == cluster_id ? in_rows : out_rows).push_back(static_cast<Eigen::Index>(i));
    }
    if (in_rows.size() < 2 || out_rows.size() < 2) {
        throw Error(ErrorCode::ClusterTooSmall,
                    "cluster " + std::to_string(cluster_id) + " leaves " +
                        std::to_string(in_rows.size()) + " vs " + std::to_string(out_rows.size()) +
                        " samples; need >= 2 on both sides");
    }

    const std::size_t n_genes = xz.gene_ids.size();
    std::vector<double> in_values(in_rows.size()), out_values(out_rows.size());
    std::vector<double> p_values(n_genes);
    DeTable table;
    table.rows.resize(n_genes);
    for (std::size_t g = 0; g < n_genes; ++g) {
        const Eigen::Index col = static_cast<Eigen::Index>(g);
        for (std::size_t i = 0; i < in_rows.size(); ++i) in_values[i] = xz.values(in_rows[i], col);
        for (std::size_t i = 0; i < out_rows.size(); ++i)
            out_values[i] = xz.values(out_rows[i], col);
        const stats::TwoSampleResult r = stats::welch_t(in_values, out_values);
        DeRow& row = table.rows[g];
        row.gene_id = xz.gene_ids[g];
        row.effect = r.effect;
        row.t_stat = r.t_stat;
        row.df = r.df;
        row.p_value = r.p_value;
        p_values[g] = r.p_value;
    }

    const std::vector<double> q = stats::bh_fdr(p_values);
    for (std::size_t g = 0; g < n_genes; ++g) table.rows[g].fdr = q[g];

    std::sort(table.rows.begin(), table.rows.end(), [](const DeRow& a, const DeRow& b) {
        if (a.fdr != b.fdr) return a.fdr < b.fdr;
        const double ea = std::fabs(a.effect);
        const double eb = std::fabs(b.effect);
        if (ea != eb) return ea > eb;
        return a.gene_id < b.gene_id;
    });
    return table;
}

MarkerSelection select_markers(const DeTable& table, double fdr_threshold, std::size_t top_n) {
    MarkerSelection sel;
    sel.requested = top_n;

    std::vector<const DeRow*> significant;
    for (const DeRow& row : table.rows) {
        if (row.fdr < fdr_threshold) significant.push_back(&row);
    }
    std::vector<const DeRow*> by_effect = significant;
    std::sort(by_effect.begin(), by_effect.end(), [](const DeRow* a, const DeRow* b) {
        if (a->effect != b->effect) return a->effect > b->effect;
        return a->gene_id < b->gene_id;
    });
    for (const DeRow* row : by_effect) {
        if (sel.top_up.size() == top_n || row->effect <= 0.0) break;
        sel.top_up.push_back(row->gene_id);
    }
    for (auto it = by_effect.rbegin(); it != by_effect.rend(); ++it) {
        if (sel.top_down.size() == top_n || (*it)->effect >= 0.0) break;
        sel.top_down.push_back((*it)->gene_id);
    }
    sel.shortfall = sel.top_up.size() < top_n || sel.top_down.size() < top_n;
    return sel;
}

std::vector<VolcanoPoint> volcano_data(const DeTable& table, double fdr_threshold,
                                       double effect_threshold) {
    if (!(fdr_threshold > 0.0) || !(effect_threshold > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "volcano thresholds must be > 0");
    }
    constexpr double kYClamp = 320.0;
    std::vector<VolcanoPoint> points;
    points.reserve(table.rows.size());
    for (const DeRow& row : table.rows) {
        VolcanoPoint pt;
        pt.gene_id = row.gene_id;
        pt.effect = row.effect;
        pt.neg_log10_fdr = row.fdr > 0.0 ? std::min(kYClamp, -std::log10(row.fdr)) : kYClamp;
        pt.highlighted = row.fdr < fdr_threshold && std::fabs(row.effect) >= effect_threshold;
        points.push_back(std::move(pt));
    }
    return points;
}

HeatmapData heatmap_data(const ScaledMatrix& xz, const std::vector<int>& labels, int cluster_id,
                         const MarkerSelection& markers) {
    const std::size_t n = xz.sample_ids.size();
    if (labels.size() != n) {
        throw Error(ErrorCode::LengthMismatch, "labels length != sample count");
    }
    if (markers.top_up.empty() && markers.top_down.empty()) {
        throw Error(ErrorCode::MissingUpstream, "no marker genes selected");
    }
    std::vector<std::size_t> in_rows, out_rows;
    for (std::size_t i = 0; i < n; ++i) {
        (labels[i] == cluster_id ? in_rows : out_rows).push_back(i);
    }
    if (in_rows.size() < 2 || out_rows.size() < 2) {
        throw Error(ErrorCode::ClusterTooSmall, "cluster-vs-rest split too small for heatmap");
    }

    HeatmapData h;
    h.gene_ids = markers.top_down;
    h.gene_ids.insert(h.gene_ids.end(), markers.top_up.begin(), markers.top_up.end());
    h.n_in_cluster = in_rows.size();
    for (std::size_t i : in_rows) h.sample_ids.push_back(xz.sample_ids[i]);
    for (std::size_t i : out_rows) h.sample_ids.push_back(xz.sample_ids[i]);

    std::vector<std::size_t> sample_order = in_rows;
    sample_order.insert(sample_order.end(), out_rows.begin(), out_rows.end());

    h.values.resize(static_cast<Eigen::Index>(h.gene_ids.size()),
                    static_cast<Eigen::Index>(n));
    for (std::size_t g = 0; g < h.gene_ids.size(); ++g) {
        const auto it = std::find(xz.gene_ids.begin(), xz.gene_ids.end(), h.gene_ids[g]);
        if (it == xz.gene_ids.end()) {
            throw Error(ErrorCode::MissingUpstream,
                        "marker gene '" + h.gene_ids[g] + "' is not in the scaled matrix");
        }
        const Eigen::Index col = static_cast<Eigen::Index>(it - xz.gene_ids.begin());
        for (std::size_t s = 0; s < sample_order.size(); ++s) {
            h.values(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(s)) =
                xz.values(static_cast<Eigen::Index>(sample_order[s]), col);
        }
    }
    return h;
}

void save_de_csv(const DeTable& table, const std::string& path) {
    std::string text = "gene,effect,t,df,p,fdr\n";
    for (const DeRow& row : table.rows) {
        text += csv::escape_field(row.gene_id);
        text += ',';
        text += csv::format_double(row.effect);
        text += ',';
        text += csv::format_double(row.t_stat);
        text += ',';
        text += csv::format_double(row.df);
        text += ',';
        text += csv::format_double(row.p_value);
        text += ',';
        text += csv::format_double(row.fdr);
        text += '\n';
    }
    csv::write_file(path, text);
}

DeTable load_de_csv(const std::string& path) {
    csv::Table csv_table = csv::read_file(path);
    if (csv_table.rows.empty() || csv_table.rows.front().size() != 6) {
        throw Error(ErrorCode::MalformedHeader, "'" + path + "' is not a DE table");
    }
    DeTable table;
    for (std::size_t r = 1; r < csv_table.rows.size(); ++r) {
        const auto& row = csv_table.rows[r];
        DeRow out;
        out.gene_id = row[0];
        out.effect = csv::parse_double(row[1], r, 1);
        out.t_stat = csv::parse_double(row[2], r, 2);
        out.df = csv::parse_double(row[3], r, 3);
        out.p_value = csv::parse_double(row[4], r, 4);
        out.fdr = csv::parse_double(row[5], r, 5);
        table.rows.push_back(std::move(out));
    }
    return table;
}

}  // namespace raresub::de
