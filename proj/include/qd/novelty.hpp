#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qd/core.hpp"

namespace qd {

/// Mean Euclidean distance from `query` to its k nearest references (all of them when fewer
/// than k exist). An empty reference set yields +infinity.
double knn_novelty(std::span<const double> query, std::span<const Vector> references, std::size_t k);

struct NoveltyEntry {
    Vector descriptor;
    double fitness = 0.0;
};

/// Unbounded archive of past behaviors for novelty-search style methods.
class NoveltyArchive {
public:
    std::size_t size() const noexcept { return entries_.size(); }
    const std::vector<NoveltyEntry>& entries() const noexcept { return entries_; }

    /// Appends `n_add` descriptors drawn uniformly without replacement among the eligible
    /// candidates (all of them when fewer are eligible).
    void add(std::span<const Individual> candidates, std::size_t n_add, Rng& rng);

    /// Descriptors only, in insertion order.
    std::vector<Vector> descriptors() const;

private:
    std::vector<NoveltyEntry> entries_;
};

} // namespace qd
