#ifndef RARESUB_CLUSTERING_HPP
#define RARESUB_CLUSTERING_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace raresub {

struct LatentMatrix {
    std::vector<std::string> sample_ids;
    Eigen::MatrixXd values;  // samples x latent_dim

    std::size_t n_samples() const { return sample_ids.size(); }
};

struct ClusteringSolution {
    int k = 0;
    std::vector<int> labels;    // in [0, k)
    Eigen::MatrixXd centroids;  // k x latent_dim
    double inertia = 0.0;
    int n_init = 0;
    std::uint64_t seed = 0;

    std::vector<std::size_t> cluster_sizes() const;
};

struct KScanEntry {
    int k = 0;
    double silhouette = 0.0;
    double davies_bouldin = 0.0;
    std::vector<std::size_t> sizes;
};

struct KScanResult {
    std::vector<KScanEntry> entries;
};

namespace cluster {

// Best-inertia solution over n_init k-means++ seeded Lloyd runs (restart r
// uses seed+r). Lloyd stops when the relative inertia improvement drops
// below 1e-6 or after 300 iterations. Ties across restarts keep the smallest
// restart index.
ClusteringSolution kmeans(const LatentMatrix& z, int k, int n_init, std::uint64_t seed);

// Mean over samples of (b-a)/max(a,b); singleton clusters and a=b=0
// contribute 0. Euclidean distances.
double silhouette(const LatentMatrix& z, const std::vector<int>& labels);

// (1/k) sum_i max_{j!=i} (s_i+s_j)/d_ij with s = mean member-to-centroid
// distance and d = centroid distance.
double davies_bouldin(const LatentMatrix& z, const std::vector<int>& labels);

// kmeans + both indices for every k in [k_min, k_max].
KScanResult scan_k(const LatentMatrix& z, int k_min, int k_max, int n_init, std::uint64_t seed);

// Per-iteration inertia of a single seeded Lloyd run (monotonicity checks).
std::vector<double> lloyd_inertia_trace(const LatentMatrix& z, int k, std::uint64_t seed);

}  // namespace cluster
}  // namespace raresub

#endif
