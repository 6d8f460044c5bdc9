#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qd/cma_es.hpp"
#include "qd/core.hpp"
#include "qd/grid_archive.hpp"

namespace qd {

struct EmitterRanking {
    /// Batch indices, best first.
    std::vector<std::size_t> order;
    std::vector<InsertOutcome> outcomes;

    bool any_accepted() const noexcept;
};

/// Descending fitness, ties by batch position.
std::vector<std::size_t> fitness_ranking(std::span<const Individual> batch);

/// Inserts every solution (non-eligible ones at the placeholder descriptor, in batch order)
/// and ranks: new cells by fitness, then improvements by margin, then rejections by fitness.
EmitterRanking cma_me_rank(std::span<const Individual> batch, GridArchive& archive, std::size_t descriptor_dim);

/// Ranks by improvement over the cell threshold as it stood before the batch, then inserts
/// every solution with the thresholded rule. Requires archive thresholds.
EmitterRanking cma_mae_rank(std::span<const Individual> batch, GridArchive& archive, double alpha,
                            std::size_t descriptor_dim);

/// One CMA-ES instance of an emitter pool with its own random stream.
struct Emitter {
    CmaEs cma;
    Rng rng;
    std::optional<IndividualId> origin;
    int rejected_streak = 0;
    int restarts = 0;
};

/// Fixed-size set of emitters; restarts replace an emitter in place.
class EmitterPool {
public:
    EmitterPool(std::size_t count, std::size_t batch_size, double sigma0, std::size_t genome_length,
                std::uint64_t seed);

    std::size_t size() const noexcept { return emitters_.size(); }
    std::size_t batch_size() const noexcept { return batch_size_; }
    double sigma0() const noexcept { return sigma0_; }
    Emitter& operator[](std::size_t i) { return emitters_[i]; }
    const Emitter& operator[](std::size_t i) const { return emitters_[i]; }

    /// Restarts emitter i around `mean`.
    void restart(std::size_t i, const Vector& mean, std::optional<IndividualId> origin);

private:
    std::size_t batch_size_;
    double sigma0_;
    std::vector<Emitter> emitters_;
};

/// Budget split of one SERENE chunk.
struct SereneAllocation {
    std::size_t exploration = 0;
    /// One entry per emitter that runs this chunk; the last one is new when `spawn` is set.
    std::vector<std::size_t> emitter_budgets;
    bool spawn = false;
};

/// Without rewarding solutions the whole chunk funds exploration. Otherwise half of the chunk
/// is shared evenly by the active emitters plus one new emitter when an unexploited rewarding
/// candidate exists; exploration keeps the rest.
SereneAllocation serene_schedule(std::size_t chunk, std::size_t unexploited_candidates,
                                 std::size_t active_emitters);

/// Exploitation emitter of SERENE, seeded at a rewarding solution.
struct SereneEmitter {
    CmaEs cma;
    Rng rng;
    IndividualId origin = 0;
    double best = 0.0;
    int stagnation = 0;

    /// Records the best fitness of one emitter generation. Returns true once the emitter failed
    /// to improve for `patience` consecutive generations.
    bool observe(double generation_best, int patience);
};

} // namespace qd
