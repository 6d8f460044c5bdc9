#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qd/core.hpp"
#include "qd/novelty.hpp"

namespace qd {

/// Everything a parent/survivor selector may look at. Selectors return indices into `pool`.
struct SelectionContext {
    std::span<const Individual> pool;
    /// Novelty reference set (descriptors). Non-eligible pool members are queried at the
    /// placeholder descriptor.
    std::span<const Vector> references;
    /// Past behaviors with fitness, consulted by local quality in addition to the pool.
    std::span<const NoveltyEntry> archive;
    std::size_t descriptor_dim = 0;
    std::size_t k = 15;
    std::size_t local_neighbors = 50;
    Rng& rng;
};

using Selection = std::vector<std::size_t>;

/// Uniform with replacement. Throws InvalidState on an empty pool.
Selection select_random(SelectionContext& ctx, std::size_t count);

/// Highest fitness first, ties by lower id, cycling from the top when count exceeds the pool.
Selection select_fitness_desc(SelectionContext& ctx, std::size_t count);

/// Successful individuals first (uniform with replacement among them when they exceed count),
/// remainder from select_random over the whole pool.
Selection select_success_priority(SelectionContext& ctx, std::size_t count);

/// Novelty of every pool member against ctx.references.
std::vector<double> pool_novelty(const SelectionContext& ctx);

/// Most novel first, ties by lower id, cycling when count exceeds the pool.
Selection select_novelty_desc(SelectionContext& ctx, std::size_t count);

/// Successful individuals by descending novelty, then the others by descending novelty.
Selection select_success_then_novelty(SelectionContext& ctx, std::size_t count);

/// Fronts of the non-dominated sort when maximizing both objectives. Indices ascend in a front.
std::vector<std::vector<std::size_t>> non_dominated_fronts(std::span<const double> first,
                                                           std::span<const double> second);

/// Fronts taken in order; the last partial front is filled by descending `novelty`
/// (ties by lower id). Cycles over the full ordering when count exceeds the pool.
Selection select_pareto(std::span<const Individual> pool, std::span<const double> novelty,
                        std::span<const double> quality, std::size_t count);

enum class ParetoQuality { Fitness, LocalQuality };

/// Pareto selection over (novelty, fitness) or (novelty, local quality).
Selection select_pareto_novelty(SelectionContext& ctx, std::size_t count, ParetoQuality quality);

/// Number of the `n_neighbors` nearest references (by descriptor) with strictly lower fitness.
/// Distance ties resolve by reference order.
int local_quality(std::span<const double> descriptor, double fitness, std::span<const Vector> neighbor_descriptors,
                  std::span<const double> neighbor_fitness, std::size_t n_neighbors);

/// Local quality of each pool member against the other pool members and ctx.archive.
std::vector<double> pool_local_quality(const SelectionContext& ctx);

/// Each slot: a tournament of `tournament_size` distinct eligible members, the most novel wins.
/// Falls back to select_random when nobody is eligible.
Selection tournament_eligible(SelectionContext& ctx, std::size_t count, std::size_t tournament_size);

} // namespace qd
