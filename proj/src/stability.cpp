#include "raresub/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "raresub/error.hpp"

namespace raresub::stability {

namespace {

// Shortest-augmenting-path assignment with potentials; returns row -> col.
std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> col_to_row(static_cast<std::size_t>(n) + 1, 0);
    std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);

    for (int i = 1; i <= n; ++i) {
        col_to_row[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, kInf);
        std::vector<bool> used(static_cast<std::size_t>(n) + 1, false);
        do {
            used[static_cast<std::size_t>(j0)] = true;
            const int i0 = col_to_row[static_cast<std::size_t>(j0)];
            int j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost[static_cast<std::size_t>(i0 - 1)]
                                       [static_cast<std::size_t>(j - 1)] -
                                   u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(col_to_row[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (col_to_row[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            col_to_row[static_cast<std::size_t>(j0)] = col_to_row[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= n; ++j) {
        row_to_col[static_cast<std::size_t>(col_to_row[static_cast<std::size_t>(j)] - 1)] = j - 1;
    }
    return row_to_col;
}

double assignment_cost(const std::vector<std::vector<double>>& cost,
                       const std::vector<int>& row_to_col) {
    double total = 0.0;
    for (std::size_t i = 0; i < row_to_col.size(); ++i) {
        total += cost[i][static_cast<std::size_t>(row_to_col[i])];
    }
    return total;
}

// Minimum assignment cost over the submatrix given by the remaining rows and
// columns (used by the lexicographic refinement).
double completion_cost(const std::vector<std::vector<double>>& cost,
                       const std::vector<std::size_t>& rows,
                       const std::vector<std::size_t>& cols) {
    if (rows.empty()) return 0.0;
    std::vector<std::vector<double>> sub(rows.size(), std::vector<double>(cols.size()));
    for (std::size_t a = 0; a < rows.size(); ++a) {
        for (std::size_t b = 0; b < cols.size(); ++b) {
            sub[a][b] = cost[rows[a]][cols[b]];
        }
    }
    return assignment_cost(sub, solve_assignment(sub));
}

}  // namespace

std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
    const std::size_t n = cost.size();
    if (n == 0) {
        throw Error(ErrorCode::InvalidArgument, "empty cost matrix");
    }
    double scale = 0.0;
    for (const auto& row : cost) {
        if (row.size() != n) {
            throw Error(ErrorCode::NonSquare, "cost matrix is not square");
        }
        for (double x : row) {
            if (!std::isfinite(x)) {
                throw Error(ErrorCode::NonFinite, "cost matrix has a non-finite entry");
            }
            scale = std::max(scale, std::fabs(x));
        }
    }

    const std::vector<int> initial = solve_assignment(cost);
    const double optimum = assignment_cost(cost, initial);
    const double tol = 1e-9 * (1.0 + scale);

    // Fix rows top-down, taking the smallest column that still completes to
    // an optimal assignment: lexicographically smallest optimum.
    std::vector<int> result(n, -1);
    std::vector<std::size_t> free_cols(n);
    for (std::size_t j = 0; j < n; ++j) free_cols[j] = j;
    double fixed_cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> tail_rows;
        for (std::size_t r = i + 1; r < n; ++r) tail_rows.push_back(r);
        bool placed = false;
        for (std::size_t pos = 0; pos < free_cols.size(); ++pos) {
            const std::size_t j = free_cols[pos];
            std::vector<std::size_t> rest_cols;
            for (std::size_t q = 0; q < free_cols.size(); ++q) {
                if (q != pos) rest_cols.push_back(free_cols[q]);
            }
            const double completed =
                fixed_cost + cost[i][j] + completion_cost(cost, tail_rows, rest_cols);
            if (completed <= optimum + tol) {
                result[i] = static_cast<int>(j);
                fixed_cost += cost[i][j];
                free_cols.erase(free_cols.begin() + static_cast<std::ptrdiff_t>(pos));
                placed = true;
                break;
            }
        }
        if (!placed) {
            // numerically impossible; fall back to the unrefined optimum
            return initial;
        }
    }
    return result;
}

LabelAlignment align(const std::vector<int>& reference_labels, const std::vector<int>& run_labels,
                     int k) {
    if (reference_labels.size() != run_labels.size()) {
        throw Error(ErrorCode::LengthMismatch, "label vectors differ in length");
    }
    if (k < 1) {
        throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
    }
    LabelAlignment out;
    out.overlap.assign(static_cast<std::size_t>(k),
                       std::vector<std::size_t>(static_cast<std::size_t>(k), 0));
    for (std::size_t s = 0; s < reference_labels.size(); ++s) {
        const int a = reference_labels[s];
        const int b = run_labels[s];
        if (a < 0 || a >= k || b < 0 || b >= k) {
            throw Error(ErrorCode::LabelOutOfRange,
                        "label outside [0," + std::to_string(k) + ") at sample " +
                            std::to_string(s));
        }
        ++out.overlap[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    }

    // Maximize overlap == minimize negated counts. Rows are run clusters so
    // the returned permutation reads run -> reference directly.
    std::vector<std::vector<double>> cost(static_cast<std::size_t>(k),
                                          std::vector<double>(static_cast<std::size_t>(k)));
    for (int j = 0; j < k; ++j) {
        for (int i = 0; i < k; ++i) {
            cost[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] =
                -static_cast<double>(out.overlap[static_cast<std::size_t>(i)]
                                                [static_cast<std::size_t>(j)]);
        }
    }
    out.run_to_reference = hungarian(cost);

    out.aligned_labels.resize(run_labels.size());
    for (std::size_t s = 0; s < run_labels.size(); ++s) {
        out.aligned_labels[s] =
            out.run_to_reference[static_cast<std::size_t>(run_labels[s])];
    }
    return out;
}

std::vector<ClusterStability> jaccard_stability(const LatentMatrix& z, int k,
                                                const StabilityParams& params) {
    if (params.runs < 2) {
        throw Error(ErrorCode::InvalidArgument, "stability needs R >= 2 runs");
    }
    const std::size_t n = z.n_samples();
    ClusteringSolution reference = cluster::kmeans(z, k, params.n_init, params.base_seed);

    std::vector<double> jaccard_sum(static_cast<std::size_t>(k), 0.0);
    for (int r = 1; r < params.runs; ++r) {
        ClusteringSolution run =
            cluster::kmeans(z, k, params.n_init, params.base_seed + static_cast<std::uint64_t>(r));
        LabelAlignment alignment = align(reference.labels, run.labels, k);
        std::vector<std::size_t> inter(static_cast<std::size_t>(k), 0);
        std::vector<std::size_t> ref_size(static_cast<std::size_t>(k), 0);
        std::vector<std::size_t> run_size(static_cast<std::size_t>(k), 0);
        for (std::size_t s = 0; s < n; ++s) {
            const int a = reference.labels[s];
            const int b = alignment.aligned_labels[s];
            ++ref_size[static_cast<std::size_t>(a)];
            ++run_size[static_cast<std::size_t>(b)];
            if (a == b) ++inter[static_cast<std::size_t>(a)];
        }
        for (int c = 0; c < k; ++c) {
            const std::size_t uni = ref_size[static_cast<std::size_t>(c)] +
                                    run_size[static_cast<std::size_t>(c)] -
                                    inter[static_cast<std::size_t>(c)];
            if (uni > 0) {
                jaccard_sum[static_cast<std::size_t>(c)] +=
                    static_cast<double>(inter[static_cast<std::size_t>(c)]) /
                    static_cast<double>(uni);
            }
        }
    }

    const std::vector<std::size_t> sizes = reference.cluster_sizes();
    std::vector<ClusterStability> rows;
    rows.reserve(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
        ClusterStability row;
        row.k = k;
        row.cluster = c;
        row.size = sizes[static_cast<std::size_t>(c)];
        row.prevalence = static_cast<double>(row.size) / static_cast<double>(n);
        row.jaccard = jaccard_sum[static_cast<std::size_t>(c)] /
                      static_cast<double>(params.runs - 1);
        row.rare = row.prevalence < params.rare_threshold;
        row.stable = row.jaccard >= params.stable_threshold;
        rows.push_back(row);
    }
    return rows;
}

DiscoveryReport discovery_scan(const LatentMatrix& z, int k_min, int k_max,
                               const StabilityParams& params) {
    if (k_min < 2 || k_max < k_min) {
        throw Error(ErrorCode::InvalidArgument, "need 2 <= k_min <= k_max");
    }
    DiscoveryReport report;
    report.k_min = k_min;
    report.k_max = k_max;
    for (int k = k_min; k <= k_max; ++k) {
        ClusteringSolution reference = cluster::kmeans(z, k, params.n_init, params.base_seed);
        const double sil = cluster::silhouette(z, reference.labels);
        const double dbi = cluster::davies_bouldin(z, reference.labels);
        report.silhouette_by_k.push_back(sil);
        report.davies_bouldin_by_k.push_back(dbi);
        std::vector<ClusterStability> rows = jaccard_stability(z, k, params);
        for (const ClusterStability& row : rows) {
            if (row.rare && row.stable) {
                DiscoveryHit hit;
                hit.k = row.k;
                hit.cluster = row.cluster;
                hit.prevalence = row.prevalence;
                hit.jaccard = row.jaccard;
                hit.silhouette = sil;
                report.hits.push_back(hit);
            }
            report.rows.push_back(row);
        }
    }

    if (!report.hits.empty()) {
        const DiscoveryHit* chosen = &report.hits.front();
        for (const DiscoveryHit& hit : report.hits) {
            if (hit.k < chosen->k ||
                (hit.k == chosen->k && hit.prevalence < chosen->prevalence) ||
                (hit.k == chosen->k && hit.prevalence == chosen->prevalence &&
                 hit.cluster < chosen->cluster)) {
                chosen = &hit;
            }
        }
        report.found = true;
        report.chosen_k = chosen->k;
        report.chosen_cluster = chosen->cluster;
        report.rationale = "smallest k with a rare-and-stable cluster; ties broken by "
                           "smaller prevalence, then smaller cluster id";
    } else {
        report.rationale = "no rare-and-stable cluster in the scanned range";
    }
    return report;
}

ClusteringSolution final_refit(const LatentMatrix& z, int k, int n_init, std::uint64_t seed) {
    return cluster::kmeans(z, k, n_init, seed);
}

}  // namespace raresub::stability
