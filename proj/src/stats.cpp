#include "raresub/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "raresub/error.hpp"

namespace raresub::stats {

namespace {

constexpr double kRelTol = 1e-12;
constexpr int kMaxIter = 500;
constexpr double kTiny = 1e-300;

// Continued fraction for the incomplete beta (Numerical Recipes betacf,
// modified Lentz).
double beta_cf(double x, double a, double b) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kRelTol) return h;
    }
    return h;  // converged to working precision in practice; best estimate
}

}  // namespace

double incomplete_beta(double x, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0) || std::isnan(x)) {
        throw Error(ErrorCode::InvalidArgument, "incomplete_beta needs a>0, b>0, finite x");
    }
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cf(x, a, b) / a;
    }
    return 1.0 - front * beta_cf(1.0 - x, b, a) / b;
}

double t_cdf(double x, double df) {
    if (!(df > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "t_cdf needs df > 0");
    }
    if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
    if (x == 0.0) return 0.5;
    const double tail = 0.5 * incomplete_beta(df / (df + x * x), 0.5 * df, 0.5);
    return x > 0.0 ? 1.0 - tail : tail;
}

double gamma_p(double a, double x) { return 1.0 - gamma_q(a, x); }

double gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0 || std::isnan(x)) {
        throw Error(ErrorCode::InvalidArgument, "gamma_q needs a > 0, x >= 0");
    }
    if (x == 0.0) return 1.0;
    const double ln_front = a * std::log(x) - x - std::lgamma(a);
    if (x < a + 1.0) {
        // series for P(a,x), Q = 1 - P
        double term = 1.0 / a;
        double sum = term;
        double ap = a;
        for (int n = 0; n < kMaxIter; ++n) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * kRelTol) break;
        }
        return 1.0 - sum * std::exp(ln_front);
    }
    // continued fraction for Q(a,x), modified Lentz
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kRelTol) break;
    }
    return std::exp(ln_front) * h;
}

TwoSampleResult welch_t(std::span<const double> group_a, std::span<const double> group_b) {
    const std::size_t na = group_a.size();
    const std::size_t nb = group_b.size();
    if (na < 2 || nb < 2) {
        throw Error(ErrorCode::TooFewSamples, "welch_t needs >= 2 values per group, got " +
                                                  std::to_string(na) + " and " +
                                                  std::to_string(nb));
    }
    auto mean_var = [](std::span<const double> g) {
        double mean = 0.0;
        for (double v : g) mean += v;
        mean /= static_cast<double>(g.size());
        double ss = 0.0;
        for (double v : g) {
            double d = v - mean;
            ss += d * d;
        }
        return std::pair<double, double>(mean, ss / static_cast<double>(g.size() - 1));
    };
    auto [mean_a, var_a] = mean_var(group_a);
    auto [mean_b, var_b] = mean_var(group_b);

    TwoSampleResult r;
    r.effect = mean_a - mean_b;

    const double sa = var_a / static_cast<double>(na);
    const double sb = var_b / static_cast<double>(nb);
    if (sa + sb == 0.0) {
        r.degenerate = true;
        r.df = static_cast<double>(na + nb - 2);
        if (r.effect == 0.0) {
            r.t_stat = 0.0;
            r.p_value = 1.0;
        } else {
            r.t_stat = std::copysign(std::numeric_limits<double>::infinity(), r.effect);
            r.p_value = 0.0;
        }
        return r;
    }

    r.t_stat = r.effect / std::sqrt(sa + sb);
    r.df = (sa + sb) * (sa + sb) /
           (sa * sa / static_cast<double>(na - 1) + sb * sb / static_cast<double>(nb - 1));
    // Two-sided p straight from the incomplete beta; avoids the 1-cdf
    // cancellation that would floor small p-values at ~1e-16.
    const double t2 = r.t_stat * r.t_stat;
    r.p_value = incomplete_beta(r.df / (r.df + t2), 0.5 * r.df, 0.5);
    return r;
}

std::vector<double> bh_fdr(std::span<const double> p_values) {
    const std::size_t m = p_values.size();
    for (std::size_t i = 0; i < m; ++i) {
        if (!(p_values[i] >= 0.0 && p_values[i] <= 1.0)) {
            throw Error(ErrorCode::OutOfRangeP,
                        "p[" + std::to_string(i) + "] = " + std::to_string(p_values[i]));
        }
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

    std::vector<double> q(m, 0.0);
    double running = 1.0;
    for (std::size_t i = m; i-- > 0;) {
        // division first: m/m == 1 exactly, so q >= p holds at the top rank
        const double adjusted =
            p_values[order[i]] * (static_cast<double>(m) / static_cast<double>(i + 1));
        running = std::min(running, std::min(1.0, adjusted));
        q[order[i]] = running;
    }
    return q;
}

ContingencyResult chi_square_independence(const std::vector<std::vector<double>>& table) {
    const std::size_t r = table.size();
    if (r < 2) {
        throw Error(ErrorCode::InvalidArgument, "contingency table needs >= 2 rows");
    }
    const std::size_t c = table.front().size();
    if (c < 2) {
        throw Error(ErrorCode::InvalidArgument, "contingency table needs >= 2 columns");
    }
    for (const auto& row : table) {
        if (row.size() != c) {
            throw Error(ErrorCode::ShapeMismatch, "ragged contingency table");
        }
        for (double v : row) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw Error(ErrorCode::InvalidArgument, "counts must be finite and >= 0");
            }
        }
    }

    std::vector<double> row_tot(r, 0.0), col_tot(c, 0.0);
    double n = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            row_tot[i] += table[i][j];
            col_tot[j] += table[i][j];
            n += table[i][j];
        }
    }
    if (n <= 0.0) {
        throw Error(ErrorCode::ZeroMarginal, "empty table");
    }
    for (std::size_t i = 0; i < r; ++i) {
        if (row_tot[i] == 0.0) {
            throw Error(ErrorCode::ZeroMarginal, "row " + std::to_string(i) + " is all zero");
        }
    }
    for (std::size_t j = 0; j < c; ++j) {
        if (col_tot[j] == 0.0) {
            throw Error(ErrorCode::ZeroMarginal, "column " + std::to_string(j) + " is all zero");
        }
    }

    ContingencyResult res;
    res.rows = r;
    res.cols = c;
    res.dof = (r - 1) * (c - 1);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            const double expected = row_tot[i] * col_tot[j] / n;
            if (expected < 5.0) res.expected_below_5 = true;
            const double d = table[i][j] - expected;
            res.chi2 += d * d / expected;
        }
    }
    res.p_value = gamma_q(0.5 * static_cast<double>(res.dof), 0.5 * res.chi2);
    if (res.p_value <= 0.0) {
        res.p_value = std::numeric_limits<double>::denorm_min();
    }
    const double min_dof = static_cast<double>(std::min(r - 1, c - 1));
    res.cramers_v = std::sqrt(res.chi2 / (n * min_dof));
    // Variant normalized by min(r,c): kept because widely circulated
    // do-it-yourself implementations report this quantity.
    res.cramers_v_mindim = std::sqrt(res.chi2 / (n * static_cast<double>(std::min(r, c))));
    return res;
}

}  // namespace raresub::stats
