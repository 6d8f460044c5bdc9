#include "qd/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qd {

std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng Rng::derive(std::uint64_t seed, std::uint64_t stream)
{
    return Rng(mix64(mix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 1)));
}

Genome::Genome(Vector values) : values_(std::move(values))
{
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const double v = values_[i];
        if (!std::isfinite(v) || v < -1.0 || v > 1.0)
            throw std::invalid_argument("gene " + std::to_string(i) + " outside [-1, 1]");
    }
}

Genome Genome::clipped(Vector values)
{
    for (double& v : values)
        v = std::isnan(v) ? 0.0 : std::clamp(v, -1.0, 1.0);
    return Genome(std::move(values));
}

bool is_consistent(const Evaluation& e) noexcept
{
    if (e.success)
        return e.fitness > 0.0 && e.eligible();
    return e.fitness == 0.0;
}

Genome uniform_random_genome(std::size_t n, Rng& rng)
{
    if (n == 0)
        throw std::invalid_argument("genome length must be at least 1");
    Vector values(n);
    for (double& v : values)
        v = rng.uniform(-1.0, 1.0);
    return Genome::clipped(std::move(values));
}

Genome gaussian_mutate(const Genome& g, double sigma, double per_gene_prob, Rng& rng)
{
    Vector values = g.values();
    for (double& v : values) {
        if (rng.bernoulli(per_gene_prob))
            v += sigma * rng.normal();
    }
    return Genome::clipped(std::move(values));
}

Vector placeholder_descriptor(const Evaluation& e, std::size_t descriptor_dim)
{
    if (e.descriptor)
        return *e.descriptor;
    return Vector(descriptor_dim, 0.0);
}

double squared_distance(std::span<const double> a, std::span<const double> b)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b)
{
    return std::sqrt(squared_distance(a, b));
}

} // namespace qd
