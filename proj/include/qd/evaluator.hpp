#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qd/domains.hpp"

namespace qd {

/// Evaluates batches on a domain with a fixed number of worker threads. Results are returned in
/// input order, so the worker count never changes the outcome.
class Evaluator {
public:
    explicit Evaluator(const Domain& domain, std::size_t workers = 1);

    const Domain& domain() const noexcept { return domain_; }
    std::size_t workers() const noexcept { return workers_; }

    std::vector<Evaluation> evaluate(std::span<const Genome> genomes) const;

private:
    const Domain& domain_;
    std::size_t workers_;
};

} // namespace qd
