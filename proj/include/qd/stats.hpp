#pragma once

#include <span>

namespace qd::stats {

/// Linearly interpolated quantile (q in [0,1]) of an unsorted sample. Throws on an empty sample.
double quantile(std::span<const double> sample, double q);
double median(std::span<const double> sample);

struct Spread {
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;

    double iqr() const noexcept { return q3 - q1; }
};

Spread spread(std::span<const double> sample);

struct MannWhitney {
    /// U statistic of the first sample.
    double u = 0.0;
    /// Two-sided p-value.
    double p = 1.0;
    /// Exact null distribution (no ties, both samples of size <= 50); otherwise normal
    /// approximation with tie and continuity corrections.
    bool exact = false;
};

/// Two-sided Mann-Whitney U test. Throws std::invalid_argument when a sample is empty.
MannWhitney mann_whitney(std::span<const double> a, std::span<const double> b);

} // namespace qd::stats
