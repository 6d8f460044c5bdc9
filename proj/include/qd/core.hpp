#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qd/rng.hpp"

namespace qd {

using Vector = std::vector<double>;

/// Fixed-length controller parameters, every gene in [-1, 1].
class Genome {
public:
    Genome() = default;

    /// Throws std::invalid_argument if any gene is outside [-1, 1] or not finite.
    explicit Genome(Vector values);

    /// Builds a genome by clamping every gene into [-1, 1]. NaN genes become 0.
    static Genome clipped(Vector values);

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    const Vector& values() const noexcept { return values_; }
    std::span<const double> span() const noexcept { return values_; }

    bool operator==(const Genome&) const = default;

private:
    Vector values_;
};

/// Scalars extracted from an episode.
struct TrajectoryStats {
    double energy = 0.0;             // raw sum of squared per-step accelerations
    double contact_variance = 0.0;   // variance of contact points over contact steps
    int discontinuity_steps = 0;     // steps from first loss of contact to episode end
    std::optional<int> first_touch_step;

    bool operator==(const TrajectoryStats&) const = default;
};

struct Evaluation {
    std::optional<Vector> descriptor; // absent: non-eligible
    double fitness = 0.0;
    bool success = false;
    TrajectoryStats stats;

    bool eligible() const noexcept { return descriptor.has_value(); }
    bool operator==(const Evaluation&) const = default;
};

/// Checks success => fitness > 0, !success => fitness == 0, success => eligible.
bool is_consistent(const Evaluation& e) noexcept;

using IndividualId = std::uint64_t;

struct Individual {
    IndividualId id = 0;
    std::optional<IndividualId> parent_id;
    int generation = 0;
    Genome genome;
    Evaluation evaluation;
    std::optional<double> novelty;

    double fitness() const noexcept { return evaluation.fitness; }
    bool success() const noexcept { return evaluation.success; }
    bool eligible() const noexcept { return evaluation.eligible(); }
};

/// Each gene i.i.d. uniform on [-1, 1]. Throws std::invalid_argument for n == 0.
Genome uniform_random_genome(std::size_t n, Rng& rng);

/// Perturbs each gene with probability `per_gene_prob` by N(0, sigma^2), then clips to [-1, 1].
Genome gaussian_mutate(const Genome& g, double sigma, double per_gene_prob, Rng& rng);

/// The descriptor if present, otherwise the all-zeros vector of dimension `descriptor_dim`.
Vector placeholder_descriptor(const Evaluation& e, std::size_t descriptor_dim);

double euclidean_distance(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);

} // namespace qd
