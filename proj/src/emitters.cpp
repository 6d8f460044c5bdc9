#include "qd/emitters.hpp"

#include <algorithm>
#include <numeric>

namespace qd {

bool EmitterRanking::any_accepted() const noexcept
{
    return std::any_of(outcomes.begin(), outcomes.end(), [](const InsertOutcome& o) { return o.accepted(); });
}

std::vector<std::size_t> fitness_ranking(std::span<const Individual> batch)
{
    std::vector<std::size_t> order(batch.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return batch[a].fitness() > batch[b].fitness(); });
    return order;
}

EmitterRanking cma_me_rank(std::span<const Individual> batch, GridArchive& archive, std::size_t descriptor_dim)
{
    EmitterRanking r;
    r.outcomes.reserve(batch.size());
    for (const auto& ind : batch)
        r.outcomes.push_back(archive.insert(ind, placeholder_descriptor(ind.evaluation, descriptor_dim)));

    auto tier = [&](std::size_t i) {
        switch (r.outcomes[i].status) {
        case InsertStatus::NewCell:
            return 0;
        case InsertStatus::Improved:
            return 1;
        default:
            return 2;
        }
    };
    r.order.resize(batch.size());
    std::iota(r.order.begin(), r.order.end(), 0);
    std::stable_sort(r.order.begin(), r.order.end(), [&](std::size_t a, std::size_t b) {
        const int ta = tier(a), tb = tier(b);
        if (ta != tb)
            return ta < tb;
        if (ta == 1)
            return r.outcomes[a].improvement > r.outcomes[b].improvement;
        return batch[a].fitness() > batch[b].fitness();
    });
    return r;
}

EmitterRanking cma_mae_rank(std::span<const Individual> batch, GridArchive& archive, double alpha,
                            std::size_t descriptor_dim)
{
    EmitterRanking r;
    std::vector<Vector> descriptors;
    std::vector<double> value;
    descriptors.reserve(batch.size());
    for (const auto& ind : batch) {
        descriptors.push_back(placeholder_descriptor(ind.evaluation, descriptor_dim));
        value.push_back(ind.fitness() - archive.threshold(archive.flat_index_of(descriptors.back())));
    }
    r.outcomes.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i)
        r.outcomes.push_back(archive.insert_thresholded(batch[i], descriptors[i], alpha));

    r.order.resize(batch.size());
    std::iota(r.order.begin(), r.order.end(), 0);
    std::stable_sort(r.order.begin(), r.order.end(), [&](std::size_t a, std::size_t b) { return value[a] > value[b]; });
    return r;
}

EmitterPool::EmitterPool(std::size_t count, std::size_t batch_size, double sigma0, std::size_t genome_length,
                         std::uint64_t seed)
    : batch_size_(batch_size), sigma0_(sigma0)
{
    emitters_.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng = Rng::derive(seed, 0xE0000000ULL + i);
        const Genome start = uniform_random_genome(genome_length, rng);
        emitters_.push_back(Emitter{CmaEs(start.values(), sigma0, batch_size), rng, std::nullopt, 0, 0});
    }
}

void EmitterPool::restart(std::size_t i, const Vector& mean, std::optional<IndividualId> origin)
{
    Emitter& e = emitters_.at(i);
    e.cma.reset(mean, sigma0_);
    e.origin = origin;
    e.rejected_streak = 0;
    ++e.restarts;
}

SereneAllocation serene_schedule(std::size_t chunk, std::size_t unexploited_candidates, std::size_t active_emitters)
{
    SereneAllocation a;
    a.spawn = unexploited_candidates > 0;
    const std::size_t emitters = active_emitters + (a.spawn ? 1 : 0);
    if (emitters == 0) {
        a.exploration = chunk;
        return a;
    }
    const std::size_t exploit = chunk / 2;
    a.exploration = chunk - exploit;
    a.emitter_budgets.assign(emitters, exploit / emitters);
    for (std::size_t i = 0; i < exploit % emitters; ++i)
        ++a.emitter_budgets[i];
    return a;
}

bool SereneEmitter::observe(double generation_best, int patience)
{
    if (generation_best > best) {
        best = generation_best;
        stagnation = 0;
    } else {
        ++stagnation;
    }
    return stagnation >= patience;
}

} // namespace qd
