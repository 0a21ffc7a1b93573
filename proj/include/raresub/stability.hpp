#ifndef RARESUB_STABILITY_HPP
#define RARESUB_STABILITY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "raresub/clustering.hpp"

namespace raresub {

struct LabelAlignment {
    // run_to_reference[j] = reference cluster that run cluster j maps onto
    std::vector<int> run_to_reference;
    // overlap[i][j] = |reference cluster i  ∩  run cluster j|
    std::vector<std::vector<std::size_t>> overlap;
    std::vector<int> aligned_labels;
};

struct ClusterStability {
    int k = 0;
    int cluster = 0;
    std::size_t size = 0;
    double prevalence = 0.0;
    double jaccard = 0.0;
    bool rare = false;
    bool stable = false;
};

struct DiscoveryHit {
    int k = 0;
    int cluster = 0;
    double prevalence = 0.0;
    double jaccard = 0.0;
    double silhouette = 0.0;
};

struct DiscoveryReport {
    std::vector<ClusterStability> rows;       // every (k, cluster) scanned
    std::vector<double> silhouette_by_k;      // reference-run silhouette, k order
    std::vector<double> davies_bouldin_by_k;  // reference-run DBI, k order
    int k_min = 0;
    int k_max = 0;
    std::vector<DiscoveryHit> hits;  // rare AND stable
    bool found = false;
    int chosen_k = 0;
    int chosen_cluster = 0;
    std::string rationale;
};

struct StabilityParams {
    int runs = 20;
    std::uint64_t base_seed = 42;
    int n_init = 10;
    double rare_threshold = 0.10;    // strict <
    double stable_threshold = 0.60;  // >=
};

namespace stability {

// Exact minimum-cost perfect assignment on a square cost matrix
// (shortest augmenting path, O(n^3)); among optimal assignments the
// lexicographically smallest row->column permutation is returned.
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost);

// Matches run cluster indices onto the reference labeling by maximizing the
// total overlap (Hungarian on negated counts).
LabelAlignment align(const std::vector<int>& reference_labels,
                     const std::vector<int>& run_labels, int k);

// R seeded k-means runs (seeds base_seed .. base_seed+R-1), run 1 as the
// reference; per-cluster mean Jaccard of the aligned member sets.
std::vector<ClusterStability> jaccard_stability(const LatentMatrix& z, int k,
                                                const StabilityParams& params);

// Stability table across k plus the rare-and-stable discovery rule:
// chosen = smallest k with a hit, ties by smaller prevalence.
DiscoveryReport discovery_scan(const LatentMatrix& z, int k_min, int k_max,
                               const StabilityParams& params);

// High-n_init refit used for differential expression and reporting.
ClusteringSolution final_refit(const LatentMatrix& z, int k, int n_init, std::uint64_t seed);

}  // namespace stability
}  // namespace raresub

#endif
