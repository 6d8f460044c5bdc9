#include "qd/selection.hpp"

#include <algorithm>
#include <numeric>

#include "qd/errors.hpp"

namespace qd {

namespace {

void require_pool(const SelectionContext& ctx)
{
    if (ctx.pool.empty())
        throw InvalidState("selection from an empty pool");
}

/// Indices sorted by descending key, ties by lower id.
std::vector<std::size_t> order_desc(std::span<const Individual> pool, std::span<const double> key)
{
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (key[a] != key[b])
            return key[a] > key[b];
        return pool[a].id < pool[b].id;
    });
    return order;
}

Selection cycle(const std::vector<std::size_t>& order, std::size_t count)
{
    Selection out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(order[i % order.size()]);
    return out;
}

} // namespace

Selection select_random(SelectionContext& ctx, std::size_t count)
{
    require_pool(ctx);
    Selection out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(ctx.rng.below(ctx.pool.size()));
    return out;
}

Selection select_fitness_desc(SelectionContext& ctx, std::size_t count)
{
    require_pool(ctx);
    std::vector<double> fitness;
    fitness.reserve(ctx.pool.size());
    for (const auto& ind : ctx.pool)
        fitness.push_back(ind.fitness());
    return cycle(order_desc(ctx.pool, fitness), count);
}

Selection select_success_priority(SelectionContext& ctx, std::size_t count)
{
    require_pool(ctx);
    std::vector<std::size_t> successes;
    for (std::size_t i = 0; i < ctx.pool.size(); ++i)
        if (ctx.pool[i].success())
            successes.push_back(i);
    if (successes.empty())
        return select_random(ctx, count);

    Selection out;
    out.reserve(count);
    if (successes.size() >= count) {
        for (std::size_t i = 0; i < count; ++i)
            out.push_back(successes[ctx.rng.below(successes.size())]);
        return out;
    }
    out = successes;
    const Selection fill = select_random(ctx, count - successes.size());
    out.insert(out.end(), fill.begin(), fill.end());
    return out;
}

std::vector<double> pool_novelty(const SelectionContext& ctx)
{
    std::vector<double> novelty;
    novelty.reserve(ctx.pool.size());
    for (const auto& ind : ctx.pool) {
        const Vector d = placeholder_descriptor(ind.evaluation, ctx.descriptor_dim);
        novelty.push_back(knn_novelty(d, ctx.references, ctx.k));
    }
    return novelty;
}

Selection select_novelty_desc(SelectionContext& ctx, std::size_t count)
{
    require_pool(ctx);
    return cycle(order_desc(ctx.pool, pool_novelty(ctx)), count);
}

Selection select_success_then_novelty(SelectionContext& ctx, std::size_t count)
{
    require_pool(ctx);
    const std::vector<double> novelty = pool_novelty(ctx);
    std::vector<std::size_t> order = order_desc(ctx.pool, novelty);
    std::stable_partition(order.begin(), order.end(),
                          [&](std::size_t i) { return ctx.pool[i].success(); });
    return cycle(order, count);
}

std::vector<std::vector<std::size_t>> non_dominated_fronts(std::span<const double> first,
                                                           std::span<const double> second)
{
    const std::size_t n = first.size();
    std::vector<std::vector<std::size_t>> dominates(n);
    std::vector<std::size_t> dominated_by(n, 0);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b)
                continue;
            const bool no_worse = first[a] >= first[b] && second[a] >= second[b];
            const bool better = first[a] > first[b] || second[a] > second[b];
            if (no_worse && better) {
                dominates[a].push_back(b);
                ++dominated_by[b];
            }
        }
    }
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i)
        if (dominated_by[i] == 0)
            current.push_back(i);
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t a : current)
            for (std::size_t b : dominates[a])
                if (--dominated_by[b] == 0)
                    next.push_back(b);
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

Selection select_pareto(std::span<const Individual> pool, std::span<const double> novelty,
                        std::span<const double> quality, std::size_t count)
{
    if (pool.empty())
        throw InvalidState("selection from an empty pool");
    std::vector<std::size_t> order;
    order.reserve(pool.size());
    for (auto& front : non_dominated_fronts(novelty, quality)) {
        std::sort(front.begin(), front.end(), [&](std::size_t a, std::size_t b) {
            if (novelty[a] != novelty[b])
                return novelty[a] > novelty[b];
            return pool[a].id < pool[b].id;
        });
        order.insert(order.end(), front.begin(), front.end());
    }
    return cycle(order, count);
}

Selection select_pareto_novelty(SelectionContext& ctx, std::size_t count, ParetoQuality quality)
{
    require_pool(ctx);
    const std::vector<double> novelty = pool_novelty(ctx);
    std::vector<double> q;
    if (quality == ParetoQuality::LocalQuality) {
        q = pool_local_quality(ctx);
    } else {
        for (const auto& ind : ctx.pool)
            q.push_back(ind.fitness());
    }
    return select_pareto(ctx.pool, novelty, q, count);
}

int local_quality(std::span<const double> descriptor, double fitness, std::span<const Vector> neighbor_descriptors,
                  std::span<const double> neighbor_fitness, std::size_t n_neighbors)
{
    std::vector<std::pair<double, std::size_t>> by_distance;
    by_distance.reserve(neighbor_descriptors.size());
    for (std::size_t i = 0; i < neighbor_descriptors.size(); ++i)
        by_distance.emplace_back(squared_distance(descriptor, neighbor_descriptors[i]), i);
    const std::size_t n = std::min(n_neighbors, by_distance.size());
    std::partial_sort(by_distance.begin(), by_distance.begin() + static_cast<std::ptrdiff_t>(n),
                      by_distance.end());
    int lower = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (neighbor_fitness[by_distance[i].second] < fitness)
            ++lower;
    return lower;
}

std::vector<double> pool_local_quality(const SelectionContext& ctx)
{
    const std::size_t n = ctx.pool.size();
    std::vector<Vector> descriptors;
    std::vector<double> fitness;
    descriptors.reserve(n + ctx.archive.size());
    for (const auto& ind : ctx.pool) {
        descriptors.push_back(placeholder_descriptor(ind.evaluation, ctx.descriptor_dim));
        fitness.push_back(ind.fitness());
    }
    for (const auto& e : ctx.archive) {
        descriptors.push_back(e.descriptor);
        fitness.push_back(e.fitness);
    }

    std::vector<double> out(n);
    std::vector<std::pair<double, std::size_t>> by_distance;
    for (std::size_t i = 0; i < n; ++i) {
        by_distance.clear();
        for (std::size_t j = 0; j < descriptors.size(); ++j)
            if (j != i)
                by_distance.emplace_back(squared_distance(descriptors[i], descriptors[j]), j);
        const std::size_t m = std::min(ctx.local_neighbors, by_distance.size());
        std::partial_sort(by_distance.begin(), by_distance.begin() + static_cast<std::ptrdiff_t>(m),
                          by_distance.end());
        int lower = 0;
        for (std::size_t r = 0; r < m; ++r)
            if (fitness[by_distance[r].second] < fitness[i])
                ++lower;
        out[i] = lower;
    }
    return out;
}

Selection tournament_eligible(SelectionContext& ctx, std::size_t count, std::size_t tournament_size)
{
    require_pool(ctx);
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < ctx.pool.size(); ++i)
        if (ctx.pool[i].eligible())
            eligible.push_back(i);
    if (eligible.empty())
        return select_random(ctx, count);

    std::vector<double> novelty(ctx.pool.size(), 0.0);
    for (std::size_t i : eligible)
        novelty[i] = knn_novelty(*ctx.pool[i].evaluation.descriptor, ctx.references, ctx.k);

    const std::size_t size = std::clamp<std::size_t>(tournament_size, 1, eligible.size());
    Selection out;
    out.reserve(count);
    std::vector<std::size_t> draw = eligible;
    for (std::size_t slot = 0; slot < count; ++slot) {
        std::size_t best = 0;
        bool have = false;
        for (std::size_t i = 0; i < size; ++i) {
            const std::size_t j = i + ctx.rng.below(draw.size() - i);
            std::swap(draw[i], draw[j]);
            const std::size_t c = draw[i];
            if (!have || novelty[c] > novelty[best] ||
                (novelty[c] == novelty[best] && ctx.pool[c].id < ctx.pool[best].id)) {
                best = c;
                have = true;
            }
        }
        out.push_back(best);
    }
    return out;
}

} // namespace qd
