#include "raresub/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "raresub/csv.hpp"
#include "raresub/error.hpp"
#include "raresub/svg.hpp"

namespace raresub::report {

namespace {

constexpr const char* kAccent = "#d62728";   // rare cluster / highlights
constexpr const char* kPrimary = "#1f77b4";  // default series colour
constexpr const char* kMuted = "#9e9e9e";

// Shared axis framing for the simple plots below.
struct Frame {
    double width = 640, height = 440;
    double left = 64, right = 24, top = 40, bottom = 56;

    double plot_w() const { return width - left - right; }
    double plot_h() const { return height - top - bottom; }
    double x(double v, double lo, double hi) const {
        return left + (hi > lo ? (v - lo) / (hi - lo) : 0.5) * plot_w();
    }
    double y(double v, double lo, double hi) const {
        return top + plot_h() - (hi > lo ? (v - lo) / (hi - lo) : 0.5) * plot_h();
    }
};

void draw_axes(svg::Document& doc, const Frame& f, const std::string& title,
               const std::string& x_label, const std::string& y_label) {
    doc.line(f.left, f.top, f.left, f.top + f.plot_h(), "#333333");
    doc.line(f.left, f.top + f.plot_h(), f.left + f.plot_w(), f.top + f.plot_h(), "#333333");
    doc.text(f.width / 2, 22, title, 13.0, "middle");
    doc.text(f.left + f.plot_w() / 2, f.height - 14, x_label, 11.0, "middle");
    doc.text(18, f.top + f.plot_h() / 2, y_label, 11.0, "middle", -90.0);
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return std::string(buf);
}

void y_ticks(svg::Document& doc, const Frame& f, double lo, double hi, int n = 5) {
    for (int t = 0; t <= n; ++t) {
        const double v = lo + (hi - lo) * t / n;
        const double py = f.y(v, lo, hi);
        doc.line(f.left - 4, py, f.left, py, "#333333");
        doc.text(f.left - 8, py + 4, tick_label(v), 10.0, "end");
    }
}

}  // namespace

ContingencyTable contingency(const std::vector<std::string>& class_labels,
                             const std::vector<int>& cluster_labels) {
    if (class_labels.size() != cluster_labels.size()) {
        throw Error(ErrorCode::LengthMismatch, "class and cluster label lengths differ");
    }
    if (class_labels.empty()) {
        throw Error(ErrorCode::LengthMismatch, "empty label vectors");
    }
    ContingencyTable table;
    {
        std::set<std::string> classes(class_labels.begin(), class_labels.end());
        table.row_labels.assign(classes.begin(), classes.end());
    }
    int max_cluster = 0;
    for (int c : cluster_labels) {
        if (c < 0) throw Error(ErrorCode::LabelOutOfRange, "negative cluster label");
        max_cluster = std::max(max_cluster, c);
    }
    for (int c = 0; c <= max_cluster; ++c) table.col_labels.push_back(c);

    std::map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < table.row_labels.size(); ++i) row_of[table.row_labels[i]] = i;

    table.counts.assign(table.row_labels.size(),
                        std::vector<double>(table.col_labels.size(), 0.0));
    for (std::size_t i = 0; i < class_labels.size(); ++i) {
        table.counts[row_of[class_labels[i]]][static_cast<std::size_t>(cluster_labels[i])] += 1.0;
    }
    table.normalized = table.counts;
    for (auto& row : table.normalized) {
        double total = 0.0;
        for (double v : row) total += v;
        if (total > 0.0) {
            for (double& v : row) v /= total;
        }
    }
    return table;
}

void save_contingency_csv(const ContingencyTable& table, const std::string& path) {
    std::string text = "class";
    for (int c : table.col_labels) text += ",cluster_" + std::to_string(c);
    for (int c : table.col_labels) text += ",frac_cluster_" + std::to_string(c);
    text += '\n';
    for (std::size_t r = 0; r < table.row_labels.size(); ++r) {
        text += csv::escape_field(table.row_labels[r]);
        for (double v : table.counts[r]) {
            text += ',';
            text += csv::format_double(v);
        }
        for (double v : table.normalized[r]) {
            text += ',';
            text += csv::format_double(v);
        }
        text += '\n';
    }
    csv::write_file(path, text);
}

Eigen::MatrixXd pca2(const Eigen::MatrixXd& z) {
    const Eigen::Index n = z.rows();
    if (n < 2) {
        throw Error(ErrorCode::TooFewSamples, "pca needs >= 2 samples");
    }
    Eigen::MatrixXd centered = z.rowwise() - z.colwise().mean();
    Eigen::MatrixXd cov =
        (centered.transpose() * centered) / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorCode::NonFinite, "eigendecomposition failed");
    }
    // eigenvalues ascend; take the last two columns
    Eigen::MatrixXd components(z.cols(), 2);
    components.col(0) = solver.eigenvectors().col(z.cols() - 1);
    components.col(1) = solver.eigenvectors().col(z.cols() - 2);
    for (int c = 0; c < 2; ++c) {
        Eigen::Index arg_max = 0;
        components.col(c).cwiseAbs().maxCoeff(&arg_max);
        if (components(arg_max, c) < 0.0) components.col(c) = -components.col(c);
    }
    return centered * components;
}

void figure_metric_curve(const KScanResult& scan, bool silhouette, const std::string& svg_path,
                         const std::string& csv_path) {
    std::string csv_text = silhouette ? "k,silhouette\n" : "k,davies_bouldin\n";
    std::vector<double> xs, ys;
    for (const KScanEntry& e : scan.entries) {
        const double v = silhouette ? e.silhouette : e.davies_bouldin;
        xs.push_back(static_cast<double>(e.k));
        ys.push_back(v);
        csv_text += std::to_string(e.k) + "," + csv::format_double(v) + "\n";
    }
    csv::write_file(csv_path, csv_text);

    Frame f;
    svg::Document doc(f.width, f.height);
    const double x_lo = xs.front() - 0.5, x_hi = xs.back() + 0.5;
    double y_lo = *std::min_element(ys.begin(), ys.end());
    double y_hi = *std::max_element(ys.begin(), ys.end());
    const double pad = (y_hi - y_lo) * 0.1 + 1e-12;
    y_lo -= pad;
    y_hi += pad;
    draw_axes(doc, f, silhouette ? "Silhouette score by k" : "Davies-Bouldin index by k", "k",
              silhouette ? "silhouette" : "DBI");
    y_ticks(doc, f, y_lo, y_hi);
    std::string points;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double px = f.x(xs[i], x_lo, x_hi);
        const double py = f.y(ys[i], y_lo, y_hi);
        points += svg::Document::coord(px) + "," + svg::Document::coord(py) + " ";
        doc.line(px, f.top + f.plot_h(), px, f.top + f.plot_h() + 4, "#333333");
        doc.text(px, f.top + f.plot_h() + 16, std::to_string(static_cast<int>(xs[i])), 10.0,
                 "middle");
    }
    doc.polyline(points, kPrimary);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        doc.circle(f.x(xs[i], x_lo, x_hi), f.y(ys[i], y_lo, y_hi), 3.0, kPrimary);
    }
    doc.write(svg_path);
}

void figure_cluster_sizes(const std::vector<std::size_t>& sizes, int k, int rare_cluster,
                          const std::string& svg_path, const std::string& csv_path) {
    std::string csv_text = "cluster,size,rare\n";
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        csv_text += std::to_string(c) + "," + std::to_string(sizes[c]) + "," +
                    (static_cast<int>(c) == rare_cluster ? "1" : "0") + "\n";
    }
    csv::write_file(csv_path, csv_text);

    Frame f;
    svg::Document doc(f.width, f.height);
    const double y_hi = static_cast<double>(*std::max_element(sizes.begin(), sizes.end())) * 1.1;
    draw_axes(doc, f, "Cluster sizes (k=" + std::to_string(k) + ")", "cluster", "samples");
    y_ticks(doc, f, 0.0, y_hi);
    const double slot = f.plot_w() / static_cast<double>(sizes.size());
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        const double h = f.plot_h() * static_cast<double>(sizes[c]) / y_hi;
        const double x = f.left + slot * static_cast<double>(c) + slot * 0.15;
        doc.rect(x, f.top + f.plot_h() - h, slot * 0.7, h,
                 static_cast<int>(c) == rare_cluster ? kAccent : kPrimary);
        doc.text(x + slot * 0.35, f.top + f.plot_h() + 16, "C" + std::to_string(c), 10.0,
                 "middle");
        doc.text(x + slot * 0.35, f.top + f.plot_h() - h - 6, std::to_string(sizes[c]), 10.0,
                 "middle");
    }
    doc.write(svg_path);
}

void figure_stability_bars(const std::vector<ClusterStability>& rows, int k, int rare_cluster,
                           double threshold, const std::string& svg_path,
                           const std::string& csv_path) {
    std::vector<const ClusterStability*> selected;
    for (const ClusterStability& row : rows) {
        if (row.k == k) selected.push_back(&row);
    }
    std::string csv_text = "cluster,jaccard,prevalence,rare,stable\n";
    for (const ClusterStability* row : selected) {
        csv_text += std::to_string(row->cluster) + "," + csv::format_double(row->jaccard) + "," +
                    csv::format_double(row->prevalence) + "," + (row->rare ? "1" : "0") + "," +
                    (row->stable ? "1" : "0") + "\n";
    }
    csv::write_file(csv_path, csv_text);

    Frame f;
    svg::Document doc(f.width, f.height);
    draw_axes(doc, f, "Cluster stability (k=" + std::to_string(k) + ")", "cluster",
              "mean Jaccard");
    y_ticks(doc, f, 0.0, 1.0);
    const double slot = selected.empty() ? f.plot_w()
                                         : f.plot_w() / static_cast<double>(selected.size());
    for (std::size_t i = 0; i < selected.size(); ++i) {
        const ClusterStability* row = selected[i];
        const double h = f.plot_h() * row->jaccard;
        const double x = f.left + slot * static_cast<double>(i) + slot * 0.15;
        doc.rect(x, f.top + f.plot_h() - h, slot * 0.7, h,
                 row->cluster == rare_cluster ? kAccent : kPrimary);
        doc.text(x + slot * 0.35, f.top + f.plot_h() + 16, "C" + std::to_string(row->cluster),
                 10.0, "middle");
    }
    const double ty = f.y(threshold, 0.0, 1.0);
    doc.line(f.left, ty, f.left + f.plot_w(), ty, "#333333", 1.0, true);
    doc.text(f.left + f.plot_w() - 4, ty - 6, "threshold " + tick_label(threshold), 10.0, "end");
    doc.write(svg_path);
}

void figure_volcano(const std::vector<VolcanoPoint>& points, const std::string& svg_path,
                    const std::string& csv_path) {
    std::string csv_text = "gene,effect,neg_log10_fdr,highlighted\n";
    for (const VolcanoPoint& pt : points) {
        csv_text += csv::escape_field(pt.gene_id) + "," + csv::format_double(pt.effect) + "," +
                    csv::format_double(pt.neg_log10_fdr) + "," + (pt.highlighted ? "1" : "0") +
                    "\n";
    }
    csv::write_file(csv_path, csv_text);

    Frame f;
    svg::Document doc(f.width, f.height);
    double x_lo = 0.0, x_hi = 0.0, y_hi = 1.0;
    for (const VolcanoPoint& pt : points) {
        x_lo = std::min(x_lo, pt.effect);
        x_hi = std::max(x_hi, pt.effect);
        y_hi = std::max(y_hi, pt.neg_log10_fdr);
    }
    const double pad = (x_hi - x_lo) * 0.05 + 1e-12;
    x_lo -= pad;
    x_hi += pad;
    y_hi *= 1.05;
    draw_axes(doc, f, "Cluster-vs-rest differential expression", "effect (z-units)",
              "-log10(FDR)");
    y_ticks(doc, f, 0.0, y_hi);
    for (const VolcanoPoint& pt : points) {
        if (pt.highlighted) continue;  // draw grey cloud first
        doc.circle(f.x(pt.effect, x_lo, x_hi), f.y(pt.neg_log10_fdr, 0.0, y_hi), 1.6, kMuted);
    }
    for (const VolcanoPoint& pt : points) {
        if (!pt.highlighted) continue;
        const double px = f.x(pt.effect, x_lo, x_hi);
        const double py = f.y(pt.neg_log10_fdr, 0.0, y_hi);
        doc.circle(px, py, 2.6, kAccent);
        doc.text(px + 4, py - 4, pt.gene_id, 8.0);
    }
    doc.write(svg_path);
}

void figure_heatmap(const HeatmapData& heatmap, const std::string& svg_path,
                    const std::string& csv_path) {
    std::string csv_text = "gene";
    for (const auto& s : heatmap.sample_ids) csv_text += "," + csv::escape_field(s);
    csv_text += '\n';
    for (std::size_t g = 0; g < heatmap.gene_ids.size(); ++g) {
        csv_text += csv::escape_field(heatmap.gene_ids[g]);
        for (Eigen::Index s = 0; s < heatmap.values.cols(); ++s) {
            csv_text += ',';
            csv_text += csv::format_double(heatmap.values(static_cast<Eigen::Index>(g), s));
        }
        csv_text += '\n';
    }
    csv::write_file(csv_path, csv_text);

    const std::size_t n_genes = heatmap.gene_ids.size();
    const std::size_t n_samples = heatmap.sample_ids.size();
    const double cell_w = std::max(2.0, std::min(8.0, 560.0 / static_cast<double>(n_samples)));
    const double cell_h = std::max(4.0, std::min(12.0, 360.0 / static_cast<double>(n_genes)));
    const double left = 110.0, top = 40.0;
    svg::Document doc(left + cell_w * static_cast<double>(n_samples) + 30.0,
                      top + cell_h * static_cast<double>(n_genes) + 40.0);
    doc.text(left, 22, "Marker heatmap (z-scores, cluster members left)", 12.0);

    // diverging blue-white-red, clamped at |z| = 3
    auto colour = [](double v) {
        const double t = std::clamp(v / 3.0, -1.0, 1.0);
        int r, g, b;
        if (t < 0) {
            r = static_cast<int>(255 * (1.0 + t));
            g = static_cast<int>(255 * (1.0 + t));
            b = 255;
        } else {
            r = 255;
            g = static_cast<int>(255 * (1.0 - t));
            b = static_cast<int>(255 * (1.0 - t));
        }
        char buf[16];
        std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
        return std::string(buf);
    };

    for (std::size_t g = 0; g < n_genes; ++g) {
        doc.text(left - 6, top + cell_h * (static_cast<double>(g) + 0.8), heatmap.gene_ids[g],
                 std::min(9.0, cell_h - 1.0), "end");
        for (std::size_t s = 0; s < n_samples; ++s) {
            doc.rect(left + cell_w * static_cast<double>(s), top + cell_h * static_cast<double>(g),
                     cell_w, cell_h,
                     colour(heatmap.values(static_cast<Eigen::Index>(g),
                                           static_cast<Eigen::Index>(s))));
        }
    }
    // separator between in-cluster and the rest
    const double sep_x = left + cell_w * static_cast<double>(heatmap.n_in_cluster);
    doc.line(sep_x, top, sep_x, top + cell_h * static_cast<double>(n_genes), "#000000", 1.5);
    doc.write(svg_path);
}

void figure_latent_scatter(const LatentMatrix& z, const std::vector<int>& labels,
                           int highlight_cluster, const std::string& svg_path,
                           const std::string& csv_path) {
    const Eigen::MatrixXd proj = pca2(z.values);
    std::string csv_text = "sample,pc1,pc2,cluster\n";
    for (std::size_t i = 0; i < z.sample_ids.size(); ++i) {
        csv_text += csv::escape_field(z.sample_ids[i]) + "," +
                    csv::format_double(proj(static_cast<Eigen::Index>(i), 0)) + "," +
                    csv::format_double(proj(static_cast<Eigen::Index>(i), 1)) + "," +
                    std::to_string(labels[i]) + "\n";
    }
    csv::write_file(csv_path, csv_text);

    Frame f;
    svg::Document doc(f.width, f.height);
    const double x_lo = proj.col(0).minCoeff(), x_hi = proj.col(0).maxCoeff();
    const double y_lo = proj.col(1).minCoeff(), y_hi = proj.col(1).maxCoeff();
    draw_axes(doc, f, "Latent space (PCA projection)", "PC1", "PC2");
    for (std::size_t i = 0; i < z.sample_ids.size(); ++i) {
        if (labels[i] == highlight_cluster) continue;
        doc.circle(f.x(proj(static_cast<Eigen::Index>(i), 0), x_lo, x_hi),
                   f.y(proj(static_cast<Eigen::Index>(i), 1), y_lo, y_hi), 3.0, kMuted);
    }
    for (std::size_t i = 0; i < z.sample_ids.size(); ++i) {
        if (labels[i] != highlight_cluster) continue;
        doc.circle(f.x(proj(static_cast<Eigen::Index>(i), 0), x_lo, x_hi),
                   f.y(proj(static_cast<Eigen::Index>(i), 1), y_lo, y_hi), 3.5, kAccent);
    }
    doc.write(svg_path);
}

double cluster_separation(const LatentMatrix& z, const std::vector<int>& labels, int cluster_id) {
    int k = 0;
    for (int l : labels) k = std::max(k, l + 1);
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
    if (cluster_id < 0 || cluster_id >= k || sizes[static_cast<std::size_t>(cluster_id)] == 0) {
        throw Error(ErrorCode::LabelOutOfRange, "cluster_id not present");
    }

    Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(k, z.values.cols());
    for (Eigen::Index i = 0; i < z.values.rows(); ++i) {
        centroids.row(labels[static_cast<std::size_t>(i)]) += z.values.row(i);
    }
    for (int c = 0; c < k; ++c) {
        if (sizes[static_cast<std::size_t>(c)] > 0) {
            centroids.row(c) /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);
        }
    }
    double scatter = 0.0;
    for (Eigen::Index i = 0; i < z.values.rows(); ++i) {
        if (labels[static_cast<std::size_t>(i)] == cluster_id) {
            scatter += (z.values.row(i) - centroids.row(cluster_id)).norm();
        }
    }
    scatter /= static_cast<double>(sizes[static_cast<std::size_t>(cluster_id)]);

    double nearest = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
        if (c == cluster_id || sizes[static_cast<std::size_t>(c)] == 0) continue;
        nearest = std::min(nearest, (centroids.row(c) - centroids.row(cluster_id)).norm());
    }
    if (!std::isfinite(nearest)) {
        throw Error(ErrorCode::SingleCluster, "no other cluster to separate from");
    }
    return scatter > 0.0 ? nearest / scatter : std::numeric_limits<double>::infinity();
}

void save_kscan_csv(const KScanResult& scan, const std::string& path) {
    std::string text = "k,silhouette,dbi,sizes\n";
    for (const KScanEntry& e : scan.entries) {
        std::string sizes = "[";
        for (std::size_t i = 0; i < e.sizes.size(); ++i) {
            if (i > 0) sizes += ',';
            sizes += std::to_string(e.sizes[i]);
        }
        sizes += ']';
        text += std::to_string(e.k) + "," + csv::format_double(e.silhouette) + "," +
                csv::format_double(e.davies_bouldin) + "," + csv::escape_field(sizes) + "\n";
    }
    csv::write_file(path, text);
}

KScanResult load_kscan_csv(const std::string& path) {
    csv::Table table = csv::read_file(path);
    if (table.rows.empty() || table.rows.front().size() != 4) {
        throw Error(ErrorCode::MalformedHeader, "'" + path + "' is not a k-scan table");
    }
    KScanResult scan;
    for (std::size_t r = 1; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        KScanEntry entry;
        entry.k = static_cast<int>(csv::parse_double(row[0], r, 0));
        entry.silhouette = csv::parse_double(row[1], r, 1);
        entry.davies_bouldin = csv::parse_double(row[2], r, 2);
        // sizes column is a JSON-style list: [a,b,c]
        const std::string& sizes = row[3];
        std::size_t pos = 1;
        while (pos < sizes.size() && sizes[pos] != ']') {
            std::size_t next = sizes.find_first_of(",]", pos);
            entry.sizes.push_back(static_cast<std::size_t>(
                std::stoull(sizes.substr(pos, next - pos))));
            pos = next + (sizes[next] == ',' ? 1 : 0);
            if (sizes[next] == ']') break;
        }
        scan.entries.push_back(std::move(entry));
    }
    return scan;
}

void save_stability_csv(const std::vector<ClusterStability>& rows, const std::string& path) {
    std::string text = "k,cluster,size,prevalence,jaccard,rare,stable\n";
    for (const ClusterStability& row : rows) {
        text += std::to_string(row.k) + "," + std::to_string(row.cluster) + "," +
                std::to_string(row.size) + "," + csv::format_double(row.prevalence) + "," +
                csv::format_double(row.jaccard) + "," + (row.rare ? "1" : "0") + "," +
                (row.stable ? "1" : "0") + "\n";
    }
    csv::write_file(path, text);
}

std::vector<ClusterStability> load_stability_csv(const std::string& path) {
    csv::Table table = csv::read_file(path);
    if (table.rows.empty() || table.rows.front().size() != 7) {
        throw Error(ErrorCode::MalformedHeader, "'" + path + "' is not a stability table");
    }
    std::vector<ClusterStability> rows;
    for (std::size_t r = 1; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        ClusterStability out;
        out.k = static_cast<int>(csv::parse_double(row[0], r, 0));
        out.cluster = static_cast<int>(csv::parse_double(row[1], r, 1));
        out.size = static_cast<std::size_t>(csv::parse_double(row[2], r, 2));
        out.prevalence = csv::parse_double(row[3], r, 3);
        out.jaccard = csv::parse_double(row[4], r, 4);
        out.rare = row[5] == "1";
        out.stable = row[6] == "1";
        rows.push_back(out);
    }
    return rows;
}

void save_clustering_json(const ClusteringSolution& solution,
                          const std::vector<std::string>& sample_ids, const std::string& path) {
    if (sample_ids.size() != solution.labels.size()) {
        throw Error(ErrorCode::LengthMismatch, "sample ids do not match labels");
    }
    nlohmann::json j;
    j["k"] = solution.k;
    j["seed"] = solution.seed;
    j["n_init"] = solution.n_init;
    j["inertia"] = solution.inertia;
    nlohmann::json labels = nlohmann::json::object();
    for (std::size_t i = 0; i < sample_ids.size(); ++i) {
        labels[sample_ids[i]] = solution.labels[i];
    }
    j["labels"] = labels;
    // row-major centroid list keeps the file readable
    nlohmann::json centroids = nlohmann::json::array();
    for (Eigen::Index c = 0; c < solution.centroids.rows(); ++c) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index d = 0; d < solution.centroids.cols(); ++d) {
            row.push_back(solution.centroids(c, d));
        }
        centroids.push_back(row);
    }
    j["centroids"] = centroids;
    csv::write_file(path, j.dump(2) + "\n");
}

std::pair<ClusteringSolution, std::vector<std::string>> load_clustering_json(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::MissingFile, "cannot open '" + path + "'");
    }
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        throw Error(ErrorCode::MalformedJson, "invalid JSON in '" + path + "'");
    }
    ClusteringSolution solution;
    solution.k = j.at("k").get<int>();
    solution.seed = j.at("seed").get<std::uint64_t>();
    solution.n_init = j.at("n_init").get<int>();
    solution.inertia = j.at("inertia").get<double>();

    std::vector<std::string> sample_ids;
    for (const auto& [id, label] : j.at("labels").items()) {
        sample_ids.push_back(id);
        solution.labels.push_back(label.get<int>());
    }
    const auto& centroids = j.at("centroids");
    if (!centroids.empty()) {
        solution.centroids.resize(static_cast<Eigen::Index>(centroids.size()),
                                  static_cast<Eigen::Index>(centroids.front().size()));
        for (std::size_t c = 0; c < centroids.size(); ++c) {
            for (std::size_t d = 0; d < centroids[c].size(); ++d) {
                solution.centroids(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(d)) =
                    centroids[c][d].get<double>();
            }
        }
    }
    return {std::move(solution), std::move(sample_ids)};
}

void save_latent_csv(const LatentMatrix& z, const std::string& path) {
    std::string text = "sample";
    for (Eigen::Index d = 0; d < z.values.cols(); ++d) {
        text += ",z" + std::to_string(d);
    }
    text += '\n';
    for (std::size_t i = 0; i < z.sample_ids.size(); ++i) {
        text += csv::escape_field(z.sample_ids[i]);
        for (Eigen::Index d = 0; d < z.values.cols(); ++d) {
            text += ',';
            text += csv::format_double(z.values(static_cast<Eigen::Index>(i), d));
        }
        text += '\n';
    }
    csv::write_file(path, text);
}

LatentMatrix load_latent_csv(const std::string& path) {
    csv::Table table = csv::read_file(path);
    if (table.rows.size() < 2) {
        throw Error(ErrorCode::MalformedHeader, "'" + path + "' is not a latent matrix");
    }
    LatentMatrix z;
    const std::size_t dims = table.rows.front().size() - 1;
    z.values.resize(static_cast<Eigen::Index>(table.rows.size() - 1),
                    static_cast<Eigen::Index>(dims));
    for (std::size_t r = 1; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row.size() != dims + 1) {
            throw Error(ErrorCode::MalformedHeader, "latent matrix row width mismatch");
        }
        z.sample_ids.push_back(row[0]);
        for (std::size_t d = 0; d < dims; ++d) {
            z.values(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(d)) =
                csv::parse_double(row[d + 1], r, d + 1);
        }
    }
    return z;
}

}  // namespace raresub::report
