#include "raresub/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "raresub/error.hpp"
#include "raresub/rng.hpp"

namespace raresub {

std::vector<std::size_t> ClusteringSolution::cluster_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
    return sizes;
}

namespace cluster {

namespace {

double squared_distance(const Eigen::MatrixXd& z, Eigen::Index i, const Eigen::RowVectorXd& c) {
    return (z.row(i) - c).squaredNorm();
}

// k-means++: first centre uniform, then proportional to squared distance to
// the nearest chosen centre.
Eigen::MatrixXd plus_plus_init(const Eigen::MatrixXd& z, int k, Pcg32& rng) {
    const Eigen::Index n = z.rows();
    Eigen::MatrixXd centroids(k, z.cols());
    std::vector<double> dist2(static_cast<std::size_t>(n),
                              std::numeric_limits<double>::infinity());

    Eigen::Index first = static_cast<Eigen::Index>(rng.next_below(static_cast<std::uint32_t>(n)));
    centroids.row(0) = z.row(first);
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double d = squared_distance(z, i, centroids.row(c - 1));
            if (d < dist2[static_cast<std::size_t>(i)]) dist2[static_cast<std::size_t>(i)] = d;
            total += dist2[static_cast<std::size_t>(i)];
        }
        Eigen::Index chosen = n - 1;
        if (total > 0.0) {
            double target = rng.next_double() * total;
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += dist2[static_cast<std::size_t>(i)];
                if (acc >= target) {
                    chosen = i;
                    break;
                }
            }
        } else {
            // all points coincide with chosen centres
            chosen = static_cast<Eigen::Index>(rng.next_below(static_cast<std::uint32_t>(n)));
        }
        centroids.row(c) = z.row(chosen);
    }
    return centroids;
}

struct LloydRun {
    std::vector<int> labels;
    Eigen::MatrixXd centroids;
    double inertia = 0.0;
};

// One Lloyd pass from a k-means++ start. Returned labels are the assignment
// the final centroids were averaged from, so centroid == mean of members and
// inertia matches the returned pair exactly.
LloydRun lloyd(const Eigen::MatrixXd& z, int k, Pcg32& rng,
               std::vector<double>* inertia_trace = nullptr) {
    constexpr int kMaxIterations = 300;
    constexpr double kRelTol = 1e-6;
    const Eigen::Index n = z.rows();

    LloydRun run;
    run.centroids = plus_plus_init(z, k, rng);
    run.labels.assign(static_cast<std::size_t>(n), 0);

    double prev_inertia = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        // assignment step; ties go to the smaller centroid index
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double best_d = squared_distance(z, i, run.centroids.row(0));
            for (int c = 1; c < k; ++c) {
                double d = squared_distance(z, i, run.centroids.row(c));
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            run.labels[static_cast<std::size_t>(i)] = best;
        }

        // empty-cluster repair: move the point farthest from its centroid
        std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
        for (int l : run.labels) ++counts[static_cast<std::size_t>(l)];
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            Eigen::Index farthest = 0;
            double far_d = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                int l = run.labels[static_cast<std::size_t>(i)];
                if (counts[static_cast<std::size_t>(l)] <= 1) continue;
                double d = squared_distance(z, i, run.centroids.row(l));
                if (d > far_d) {
                    far_d = d;
                    farthest = i;
                }
            }
            int old = run.labels[static_cast<std::size_t>(farthest)];
            --counts[static_cast<std::size_t>(old)];
            run.labels[static_cast<std::size_t>(farthest)] = c;
            ++counts[static_cast<std::size_t>(c)];
        }

        // update step: centroids become the member means
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, z.cols());
        std::vector<double> sizes(static_cast<std::size_t>(k), 0.0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(run.labels[static_cast<std::size_t>(i)]) += z.row(i);
            sizes[static_cast<std::size_t>(run.labels[static_cast<std::size_t>(i)])] += 1.0;
        }
        for (int c = 0; c < k; ++c) {
            run.centroids.row(c) = sums.row(c) / sizes[static_cast<std::size_t>(c)];
        }

        double inertia = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            inertia +=
                squared_distance(z, i, run.centroids.row(run.labels[static_cast<std::size_t>(i)]));
        }
        run.inertia = inertia;
        if (inertia_trace) inertia_trace->push_back(inertia);
        if (std::isfinite(prev_inertia) && prev_inertia - inertia <= kRelTol * prev_inertia) break;
        prev_inertia = inertia;
    }
    return run;
}

std::size_t count_distinct_rows(const Eigen::MatrixXd& z, std::size_t needed) {
    std::vector<Eigen::Index> distinct;
    for (Eigen::Index i = 0; i < z.rows() && distinct.size() < needed; ++i) {
        bool fresh = true;
        for (Eigen::Index j : distinct) {
            if (z.row(i) == z.row(j)) {
                fresh = false;
                break;
            }
        }
        if (fresh) distinct.push_back(i);
    }
    return distinct.size();
}

}  // namespace

std::vector<double> lloyd_inertia_trace(const LatentMatrix& z, int k, std::uint64_t seed) {
    Pcg32 rng(seed);
    std::vector<double> trace;
    lloyd(z.values, k, rng, &trace);
    return trace;
}

ClusteringSolution kmeans(const LatentMatrix& z, int k, int n_init, std::uint64_t seed) {
    const Eigen::Index n = z.values.rows();
    if (k < 2) {
        throw Error(ErrorCode::InvalidArgument, "k must be >= 2");
    }
    if (static_cast<Eigen::Index>(k) > n) {
        throw Error(ErrorCode::KTooLarge,
                    "k = " + std::to_string(k) + " > n = " + std::to_string(n));
    }
    if (n_init < 1) {
        throw Error(ErrorCode::InvalidArgument, "n_init must be >= 1");
    }
    if (!z.values.allFinite()) {
        throw Error(ErrorCode::NonFinite, "latent matrix has non-finite entries");
    }
    if (count_distinct_rows(z.values, static_cast<std::size_t>(k)) <
        static_cast<std::size_t>(k)) {
        throw Error(ErrorCode::DegenerateData, "fewer distinct points than k");
    }

    ClusteringSolution best;
    best.k = k;
    best.n_init = n_init;
    best.seed = seed;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < n_init; ++r) {
        Pcg32 rng(seed + static_cast<std::uint64_t>(r));
        LloydRun run = lloyd(z.values, k, rng);
        if (run.inertia < best.inertia) {
            best.inertia = run.inertia;
            best.labels = std::move(run.labels);
            best.centroids = std::move(run.centroids);
        }
    }
    return best;
}

double silhouette(const LatentMatrix& z, const std::vector<int>& labels) {
    const Eigen::Index n = z.values.rows();
    if (labels.size() != static_cast<std::size_t>(n)) {
        throw Error(ErrorCode::LengthMismatch, "labels length != sample count");
    }
    if (n < 3) {
        throw Error(ErrorCode::TooFewSamples, "silhouette needs n >= 3");
    }
    int k = 0;
    for (int l : labels) k = std::max(k, l + 1);
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int l : labels) {
        if (l < 0) throw Error(ErrorCode::LabelOutOfRange, "negative label");
        ++sizes[static_cast<std::size_t>(l)];
    }
    std::size_t populated = 0;
    for (std::size_t s : sizes) populated += (s > 0) ? 1 : 0;
    if (populated < 2) {
        throw Error(ErrorCode::SingleCluster, "silhouette needs >= 2 clusters");
    }

    double total = 0.0;
    std::vector<double> cluster_dist(static_cast<std::size_t>(k), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        std::fill(cluster_dist.begin(), cluster_dist.end(), 0.0);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            cluster_dist[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])] +=
                (z.values.row(i) - z.values.row(j)).norm();
        }
        const int own = labels[static_cast<std::size_t>(i)];
        const std::size_t own_size = sizes[static_cast<std::size_t>(own)];
        if (own_size <= 1) continue;  // singleton contributes 0

        const double a =
            cluster_dist[static_cast<std::size_t>(own)] / static_cast<double>(own_size - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c == own || sizes[static_cast<std::size_t>(c)] == 0) continue;
            b = std::min(b, cluster_dist[static_cast<std::size_t>(c)] /
                                static_cast<double>(sizes[static_cast<std::size_t>(c)]));
        }
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

double davies_bouldin(const LatentMatrix& z, const std::vector<int>& labels) {
    const Eigen::Index n = z.values.rows();
    if (labels.size() != static_cast<std::size_t>(n)) {
        throw Error(ErrorCode::LengthMismatch, "labels length != sample count");
    }
    int k = 0;
    for (int l : labels) {
        if (l < 0) throw Error(ErrorCode::LabelOutOfRange, "negative label");
        k = std::max(k, l + 1);
    }
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];

    std::vector<int> present;
    for (int c = 0; c < k; ++c) {
        if (sizes[static_cast<std::size_t>(c)] > 0) present.push_back(c);
    }
    if (present.size() < 2) {
        throw Error(ErrorCode::SingleCluster, "davies_bouldin needs >= 2 non-empty clusters");
    }

    Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(present.size()),
                                                      z.values.cols());
    std::vector<int> dense(static_cast<std::size_t>(k), -1);
    for (std::size_t c = 0; c < present.size(); ++c) {
        dense[static_cast<std::size_t>(present[c])] = static_cast<int>(c);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        centroids.row(dense[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])]) +=
            z.values.row(i);
    }
    for (std::size_t c = 0; c < present.size(); ++c) {
        centroids.row(static_cast<Eigen::Index>(c)) /=
            static_cast<double>(sizes[static_cast<std::size_t>(present[c])]);
    }

    std::vector<double> scatter(present.size(), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int c = dense[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
        scatter[static_cast<std::size_t>(c)] += (z.values.row(i) - centroids.row(c)).norm();
    }
    for (std::size_t c = 0; c < present.size(); ++c) {
        scatter[c] /= static_cast<double>(sizes[static_cast<std::size_t>(present[c])]);
    }

    double total = 0.0;
    for (std::size_t i = 0; i < present.size(); ++i) {
        double worst = 0.0;
        for (std::size_t j = 0; j < present.size(); ++j) {
            if (i == j) continue;
            const double d = (centroids.row(static_cast<Eigen::Index>(i)) -
                              centroids.row(static_cast<Eigen::Index>(j)))
                                 .norm();
            if (d == 0.0) {
                throw Error(ErrorCode::CoincidentCentroids,
                            "clusters " + std::to_string(present[i]) + " and " +
                                std::to_string(present[j]) + " share a centroid");
            }
            worst = std::max(worst, (scatter[i] + scatter[j]) / d);
        }
        total += worst;
    }
    return total / static_cast<double>(present.size());
}

KScanResult scan_k(const LatentMatrix& z, int k_min, int k_max, int n_init, std::uint64_t seed) {
    if (k_min < 2 || k_max < k_min) {
        throw Error(ErrorCode::InvalidArgument, "need 2 <= k_min <= k_max");
    }
    KScanResult result;
    for (int k = k_min; k <= k_max; ++k) {
        ClusteringSolution sol = kmeans(z, k, n_init, seed);
        KScanEntry entry;
        entry.k = k;
        entry.silhouette = silhouette(z, sol.labels);
        entry.davies_bouldin = davies_bouldin(z, sol.labels);
        entry.sizes = sol.cluster_sizes();
        result.entries.push_back(std::move(entry));
    }
    return result;
}

}  // namespace cluster
}  // namespace raresub
