#include "qd/novelty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qd {

double knn_novelty(std::span<const double> query, std::span<const Vector> references, std::size_t k)
{
    if (references.empty())
        return std::numeric_limits<double>::infinity();
    std::vector<double> d2;
    d2.reserve(references.size());
    for (const auto& r : references)
        d2.push_back(squared_distance(query, r));
    const std::size_t n = std::min(std::max<std::size_t>(k, 1), d2.size());
    std::nth_element(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(n - 1), d2.end());
    std::sort(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(n));
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        sum += std::sqrt(d2[i]);
    return sum / static_cast<double>(n);
}

void NoveltyArchive::add(std::span<const Individual> candidates, std::size_t n_add, Rng& rng)
{
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < candidates.size(); ++i)
        if (candidates[i].eligible())
            eligible.push_back(i);
    const std::size_t take = std::min(n_add, eligible.size());
    // Partial Fisher-Yates: the first `take` slots become a uniform sample.
    for (std::size_t i = 0; i < take; ++i) {
        const std::size_t j = i + rng.below(eligible.size() - i);
        std::swap(eligible[i], eligible[j]);
        const Individual& c = candidates[eligible[i]];
        entries_.push_back({*c.evaluation.descriptor, c.fitness()});
    }
}

std::vector<Vector> NoveltyArchive::descriptors() const
{
    std::vector<Vector> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_)
        out.push_back(e.descriptor);
    return out;
}

} // namespace qd
