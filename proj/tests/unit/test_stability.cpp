#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "raresub/error.hpp"
#include "raresub/rng.hpp"
#include "raresub/stability.hpp"
#include "raresub/synth.hpp"

using namespace raresub;

namespace {

std::vector<std::vector<double>> random_cost(int n, Pcg32& rng) {
    std::vector<std::vector<double>> cost(static_cast<std::size_t>(n),
                                          std::vector<double>(static_cast<std::size_t>(n)));
    for (auto& row : cost) {
        for (double& v : row) v = rng.next_double() * 10.0 - 3.0;
    }
    return cost;
}

double cost_of(const std::vector<std::vector<double>>& cost, const std::vector<int>& perm) {
    double total = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) {
        total += cost[i][static_cast<std::size_t>(perm[i])];
    }
    return total;
}

LatentMatrix blob_latent(int per_cluster, int k, double spread, std::uint64_t seed) {
    Pcg32 rng(seed);
    LatentMatrix z;
    z.values.resize(per_cluster * k, 2);
    int row = 0;
    for (int c = 0; c < k; ++c) {
        for (int i = 0; i < per_cluster; ++i) {
            z.values(row, 0) = 30.0 * c + spread * rng.next_gaussian();
            z.values(row, 1) = spread * rng.next_gaussian();
            z.sample_ids.push_back("p" + std::to_string(row));
            ++row;
        }
    }
    return z;
}

}  // namespace

TEST_CASE("hungarian trivial matrices") {
    CHECK(stability::hungarian({{1, 2}, {2, 1}}) == std::vector<int>{0, 1});
    CHECK(stability::hungarian({{0, 5, 5}, {5, 0, 5}, {5, 5, 0}}) == std::vector<int>{0, 1, 2});
}

TEST_CASE("hungarian matches factorial brute force on random matrices") {
    Pcg32 rng(321);
    for (int n : {5, 6, 7}) {
        for (int trial = 0; trial < 200; ++trial) {
            const auto cost = random_cost(n, rng);
            const std::vector<int> perm = stability::hungarian(cost);
            CHECK(cost_of(cost, perm) == oracles::assignment_min_cost(cost));
        }
    }
}

TEST_CASE("hungarian lexicographic tie-break") {
    // every permutation costs 2: identity is the lexicographically smallest
    const std::vector<std::vector<double>> flat = {{1, 1}, {1, 1}};
    CHECK(stability::hungarian(flat) == std::vector<int>{0, 1});

    const std::vector<std::vector<double>> flat3 = {{2, 2, 2}, {2, 2, 2}, {2, 2, 2}};
    CHECK(stability::hungarian(flat3) == std::vector<int>{0, 1, 2});

    // two optima: (0->1,1->0) and (0->0,1->1) both cost 4 -> pick identity
    const std::vector<std::vector<double>> tie = {{2, 2}, {2, 2}};
    CHECK(stability::hungarian(tie) == std::vector<int>{0, 1});
}

TEST_CASE("hungarian error paths") {
    CHECK_THROWS_WITH_AS(stability::hungarian({{1, 2}, {3}}), doctest::Contains("NonSquare"),
                         Error);
    CHECK_THROWS_WITH_AS(stability::hungarian({{1.0, std::nan("")}, {1.0, 2.0}}),
                         doctest::Contains("NonFinite"), Error);
}

TEST_CASE("align recovers a label swap") {
    const std::vector<int> reference = {0, 0, 1, 1, 0};
    const std::vector<int> swapped = {1, 1, 0, 0, 1};
    const LabelAlignment a = stability::align(reference, swapped, 2);
    CHECK(a.run_to_reference == std::vector<int>{1, 0});
    CHECK(a.aligned_labels == reference);
    CHECK(a.overlap[0][1] == 3);
    CHECK(a.overlap[1][0] == 2);
}

TEST_CASE("align identity") {
    const std::vector<int> labels = {0, 1, 2, 2, 1, 0};
    const LabelAlignment a = stability::align(labels, labels, 3);
    CHECK(a.run_to_reference == std::vector<int>{0, 1, 2});
    CHECK(a.aligned_labels == labels);
}

TEST_CASE("align maximizes agreement versus permutation brute force") {
    Pcg32 rng(888);
    for (int trial = 0; trial < 40; ++trial) {
        const int k = 2 + static_cast<int>(rng.next_below(5));  // up to 6
        std::vector<int> reference(20), run(20);
        for (int i = 0; i < 20; ++i) {
            reference[static_cast<std::size_t>(i)] =
                (i < k) ? i : static_cast<int>(rng.next_below(static_cast<std::uint32_t>(k)));
            run[static_cast<std::size_t>(i)] =
                (i < k) ? i : static_cast<int>(rng.next_below(static_cast<std::uint32_t>(k)));
        }
        const LabelAlignment a = stability::align(reference, run, k);
        std::size_t agree = 0;
        for (std::size_t s = 0; s < reference.size(); ++s) {
            if (a.aligned_labels[s] == reference[s]) ++agree;
        }
        CHECK(agree == oracles::alignment_max_agreement(reference, run, k));
    }
}

TEST_CASE("align rejects out-of-range labels") {
    CHECK_THROWS_WITH_AS(stability::align({0, 2}, {0, 1}, 2),
                         doctest::Contains("LabelOutOfRange"), Error);
    CHECK_THROWS_WITH_AS(stability::align({0, 1}, {0}, 2), doctest::Contains("LengthMismatch"),
                         Error);
}

TEST_CASE("jaccard of a hand pair of sets") {
    // S={1,2,3}, S'={2,3,4} as labelings over 6 samples, single comparison
    // J = |{2,3}| / |{1,2,3,4}| = 0.5 for cluster 0
    const std::vector<int> reference = {0, 0, 0, 1, 1, 1};
    const std::vector<int> run = {1, 0, 0, 0, 1, 1};
    const LabelAlignment a = stability::align(reference, run, 2);
    std::size_t inter = 0, uni = 0;
    for (std::size_t s = 0; s < reference.size(); ++s) {
        const bool in_ref = reference[s] == 0;
        const bool in_run = a.aligned_labels[s] == 0;
        if (in_ref && in_run) ++inter;
        if (in_ref || in_run) ++uni;
    }
    CHECK(static_cast<double>(inter) / static_cast<double>(uni) == doctest::Approx(0.5));
}

TEST_CASE("jaccard_stability is 1 on perfectly separated blobs") {
    const LatentMatrix z = blob_latent(15, 3, 0.3, 12);
    StabilityParams params;
    params.runs = 6;
    params.base_seed = 42;
    params.n_init = 5;
    const std::vector<ClusterStability> rows = stability::jaccard_stability(z, 3, params);
    REQUIRE(rows.size() == 3);
    for (const ClusterStability& row : rows) {
        CHECK(row.jaccard == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(row.stable);
        CHECK(!row.rare);  // all clusters are one third of the cohort
        CHECK(row.size == 15);
        CHECK(row.prevalence == doctest::Approx(1.0 / 3.0));
    }
}

TEST_CASE("rare and stable flags use strict-less and greater-or-equal") {
    ClusterStability row;
    row.prevalence = 0.10;
    row.jaccard = 0.60;
    // re-derive flags the way jaccard_stability sets them
    StabilityParams params;
    CHECK_FALSE(row.prevalence < params.rare_threshold);
    CHECK(row.jaccard >= params.stable_threshold);
}

TEST_CASE("sample order permutation leaves stability rows unchanged") {
    const LatentMatrix z = blob_latent(10, 2, 2.0, 31);
    StabilityParams params;
    params.runs = 4;
    params.n_init = 4;
    const std::vector<ClusterStability> base = stability::jaccard_stability(z, 2, params);

    // reverse sample order
    LatentMatrix rev;
    rev.values.resize(z.values.rows(), z.values.cols());
    for (Eigen::Index i = 0; i < z.values.rows(); ++i) {
        rev.values.row(i) = z.values.row(z.values.rows() - 1 - i);
        rev.sample_ids.push_back(z.sample_ids[static_cast<std::size_t>(z.values.rows() - 1 - i)]);
    }
    const std::vector<ClusterStability> flipped = stability::jaccard_stability(rev, 2, params);

    // match rows by size (k=2: sizes identify clusters up to relabeling)
    auto key = [](const ClusterStability& r) { return std::make_pair(r.size, r.jaccard); };
    std::vector<std::pair<std::size_t, double>> a, b;
    for (const auto& r : base) a.push_back(key(r));
    for (const auto& r : flipped) b.push_back(key(r));
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].first == b[i].first);
        CHECK(a[i].second == doctest::Approx(b[i].second).epsilon(1e-9));
    }
}

TEST_CASE("discovery_scan finds nothing on two balanced blobs") {
    const LatentMatrix z = blob_latent(20, 2, 0.5, 7);
    StabilityParams params;
    params.runs = 5;
    params.n_init = 4;
    const DiscoveryReport report = stability::discovery_scan(z, 2, 4, params);
    CHECK(!report.found);
    CHECK(report.hits.empty());
    CHECK(report.rows.size() == 2 + 3 + 4);
    CHECK(report.silhouette_by_k.size() == 3);
}

TEST_CASE("discovery_scan finds a planted rare cluster and prefers smallest k") {
    // 2 big blobs of 30 plus one rare blob of 4 (prevalence 4/64 = 0.0625)
    Pcg32 rng(64);
    LatentMatrix z;
    z.values.resize(64, 2);
    for (int i = 0; i < 30; ++i) {
        z.values(i, 0) = rng.next_gaussian();
        z.values(i, 1) = rng.next_gaussian();
    }
    for (int i = 30; i < 60; ++i) {
        z.values(i, 0) = 30.0 + rng.next_gaussian();
        z.values(i, 1) = rng.next_gaussian();
    }
    for (int i = 60; i < 64; ++i) {
        z.values(i, 0) = 15.0 + 0.2 * rng.next_gaussian();
        z.values(i, 1) = 25.0 + 0.2 * rng.next_gaussian();
    }
    for (int i = 0; i < 64; ++i) z.sample_ids.push_back("p" + std::to_string(i));

    StabilityParams params;
    params.runs = 8;
    params.n_init = 6;
    const DiscoveryReport report = stability::discovery_scan(z, 2, 5, params);
    REQUIRE(report.found);
    CHECK(report.chosen_k == 3);
    for (const DiscoveryHit& hit : report.hits) {
        CHECK(hit.prevalence < 0.10);
        CHECK(hit.jaccard >= 0.60);
    }
    // the chosen cluster contains exactly the rare points
    const ClusteringSolution sol =
        stability::final_refit(z, report.chosen_k, 10, params.base_seed);
    // map reference-indexed chosen cluster onto the refit labeling
    const ClusteringSolution reference =
        cluster::kmeans(z, report.chosen_k, params.n_init, params.base_seed);
    const LabelAlignment alignment = stability::align(reference.labels, sol.labels,
                                                      report.chosen_k);
    int rare_in_refit = -1;
    for (int j = 0; j < report.chosen_k; ++j) {
        if (alignment.run_to_reference[static_cast<std::size_t>(j)] == report.chosen_cluster) {
            rare_in_refit = j;
        }
    }
    REQUIRE(rare_in_refit >= 0);
    for (int i = 0; i < 64; ++i) {
        CHECK((sol.labels[static_cast<std::size_t>(i)] == rare_in_refit) == (i >= 60));
    }
}

TEST_CASE("final_refit recovers two blobs exactly") {
    const LatentMatrix z = blob_latent(12, 2, 0.4, 21);
    const ClusteringSolution sol = stability::final_refit(z, 2, 30, 42);
    for (int i = 0; i < 12; ++i) {
        CHECK(sol.labels[static_cast<std::size_t>(i)] ==
              sol.labels[0]);
        CHECK(sol.labels[static_cast<std::size_t>(12 + i)] == sol.labels[12]);
    }
    CHECK(sol.labels[0] != sol.labels[12]);
    CHECK(sol.n_init == 30);
}

TEST_CASE("stability params validation") {
    const LatentMatrix z = blob_latent(5, 2, 0.4, 3);
    StabilityParams params;
    params.runs = 1;
    CHECK_THROWS_AS(stability::jaccard_stability(z, 2, params), Error);
}
