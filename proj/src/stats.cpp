#include "qd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace qd::stats {

double quantile(std::span<const double> sample, double q)
{
    if (sample.empty())
        throw std::invalid_argument("quantile of an empty sample");
    std::vector<double> s(sample.begin(), sample.end());
    std::sort(s.begin(), s.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

double median(std::span<const double> sample)
{
    return quantile(sample, 0.5);
}

Spread spread(std::span<const double> sample)
{
    return {quantile(sample, 0.5), quantile(sample, 0.25), quantile(sample, 0.75)};
}

namespace {

// Number of orderings giving each U value for sample sizes (m, n), no ties.
std::vector<double> u_distribution(std::size_t m, std::size_t n)
{
    // counts[j][u] for the current i, built by the recurrence c(i,j,u) = c(i-1,j,u-j) + c(i,j-1,u).
    const std::size_t max_u = m * n;
    std::vector<std::vector<double>> prev(n + 1, std::vector<double>(max_u + 1, 0.0));
    for (std::size_t j = 0; j <= n; ++j)
        prev[j][0] = 1.0;
    for (std::size_t i = 1; i <= m; ++i) {
        std::vector<std::vector<double>> cur(n + 1, std::vector<double>(max_u + 1, 0.0));
        cur[0][0] = 1.0;
        for (std::size_t j = 1; j <= n; ++j)
            for (std::size_t u = 0; u <= i * j; ++u)
                cur[j][u] = (u >= j ? prev[j][u - j] : 0.0) + cur[j - 1][u];
        prev = std::move(cur);
    }
    return prev[n];
}

} // namespace

MannWhitney mann_whitney(std::span<const double> a, std::span<const double> b)
{
    if (a.empty() || b.empty())
        throw std::invalid_argument("Mann-Whitney test needs two non-empty samples");
    const std::size_t m = a.size(), n = b.size(), total = m + n;

    std::vector<std::pair<double, int>> all;
    all.reserve(total);
    for (double v : a)
        all.emplace_back(v, 0);
    for (double v : b)
        all.emplace_back(v, 1);
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.first < y.first; });

    double rank_sum_a = 0.0, tie_term = 0.0;
    bool ties = false;
    for (std::size_t i = 0; i < total;) {
        std::size_t j = i;
        while (j < total && all[j].first == all[i].first)
            ++j;
        const double t = static_cast<double>(j - i);
        const double rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k)
            if (all[k].second == 0)
                rank_sum_a += rank;
        if (j - i > 1) {
            ties = true;
            tie_term += t * t * t - t;
        }
        i = j;
    }

    MannWhitney r;
    const double md = static_cast<double>(m), nd = static_cast<double>(n);
    r.u = rank_sum_a - md * (md + 1.0) / 2.0;

    if (!ties && m <= 50 && n <= 50) {
        r.exact = true;
        const std::vector<double> counts = u_distribution(m, n);
        const double all_orders = std::accumulate(counts.begin(), counts.end(), 0.0);
        const auto u = static_cast<std::size_t>(std::llround(r.u));
        double lower = 0.0, upper = 0.0;
        for (std::size_t k = 0; k < counts.size(); ++k) {
            if (k <= u)
                lower += counts[k];
            if (k >= u)
                upper += counts[k];
        }
        r.p = std::min(1.0, 2.0 * std::min(lower, upper) / all_orders);
        return r;
    }

    const double mean = md * nd / 2.0;
    const double tn = static_cast<double>(total);
    const double var = md * nd / 12.0 * ((tn + 1.0) - tie_term / (tn * (tn - 1.0)));
    if (var <= 0.0) {
        r.p = 1.0;
        return r;
    }
    const double z = std::max(std::abs(r.u - mean) - 0.5, 0.0) / std::sqrt(var);
    r.p = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    return r;
}

} // namespace qd::stats
