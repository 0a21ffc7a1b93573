#ifndef RARESUB_STATS_HPP
#define RARESUB_STATS_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace raresub::stats {

struct TwoSampleResult {
    double effect = 0.0;  // mean(a) - mean(b)
    double t_stat = 0.0;
    double df = 0.0;  // Welch-Satterthwaite
    double p_value = 1.0;
    bool degenerate = false;  // both groups constant; t is 0 or +-inf
};

struct ContingencyResult {
    std::size_t rows = 0;
    std::size_t cols = 0;
    double chi2 = 0.0;
    std::size_t dof = 0;
    double p_value = 1.0;
    double cramers_v = 0.0;         // sqrt(chi2 / (n * min(r-1, c-1)))
    double cramers_v_mindim = 0.0;  // sqrt(chi2 / (n * min(r, c))), see note below
    bool expected_below_5 = false;  // any expected cell < 5
};

// Regularized incomplete beta I_x(a,b), continued fraction (modified Lentz),
// relative tolerance 1e-12.
double incomplete_beta(double x, double a, double b);

// Student-t CDF through the incomplete beta; exact symmetry
// t_cdf(x) + t_cdf(-x) == 1 by construction.
double t_cdf(double x, double df);

// Regularized upper incomplete gamma Q(a,x): series for x < a+1, continued
// fraction otherwise, relative tolerance 1e-12.
double gamma_q(double a, double x);
double gamma_p(double a, double x);

// Welch's two-sample t-test, sample variances (ddof=1), two-sided p.
// Both groups constant: equal means -> t=0, p=1; unequal -> t=+-inf, p=0,
// flagged degenerate.
TwoSampleResult welch_t(std::span<const double> group_a, std::span<const double> group_b);

// Benjamini-Hochberg step-up q-values, input order preserved.
std::vector<double> bh_fdr(std::span<const double> p_values);

// Pearson chi-square test of independence on an r x c count table.
// p-values that underflow are clamped to the smallest positive double.
ContingencyResult chi_square_independence(const std::vector<std::vector<double>>& table);

}  // namespace raresub::stats

#endif
