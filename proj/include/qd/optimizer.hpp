#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "qd/core.hpp"
#include "qd/domains.hpp"
#include "qd/evalfw.hpp"
#include "qd/evaluator.hpp"
#include "qd/grid_archive.hpp"
#include "qd/methods.hpp"

namespace qd {

/// Run state of one method on one domain. Every evaluation goes to the sink passed to
/// run_generation; the optimizer never reads it back.
class Optimizer {
public:
    Optimizer(const MethodSpec& spec, const Domain& domain, std::uint64_t seed, std::size_t workers);
    virtual ~Optimizer() = default;
    Optimizer(const Optimizer&) = delete;
    Optimizer& operator=(const Optimizer&) = delete;

    /// One generation, using at most `max_evaluations` evaluations (the batch is truncated at
    /// the limit). Returns the number of evaluations used.
    std::size_t run_generation(EvaluationSink& sink, std::size_t max_evaluations);

    const MethodSpec& spec() const noexcept { return spec_; }
    std::size_t evaluations() const noexcept { return evaluations_; }
    int generation() const noexcept { return generation_; }

    /// The method's own grid container, if it keeps one.
    virtual const GridArchive* container() const { return nullptr; }

protected:
    virtual void step(std::size_t max_evaluations) = 0;

    /// Evaluates genomes (truncated to the remaining allowance of this generation), assigns ids
    /// in order and forwards each individual to the sink.
    std::vector<Individual> evaluate(std::vector<Genome> genomes, std::span<const std::optional<IndividualId>> parents,
                                     std::span<const int> generations);
    std::vector<Individual> evaluate(std::vector<Genome> genomes, std::span<const std::optional<IndividualId>> parents,
                                     int generation);
    std::vector<Individual> evaluate_random(std::size_t count, int generation);
    std::size_t remaining() const noexcept { return allowance_; }

    /// Mutated copy of the parent, drawn from the stream of the child id it will receive.
    Genome mutate(const Individual& parent, IndividualId child_id) const;
    IndividualId next_id() const noexcept { return next_id_; }

    const MethodSpec spec_;
    const Hyperparameters& params_;
    const Domain& domain_;
    const DomainSpec domain_spec_;
    const std::uint64_t seed_;
    Rng rng_;
    int generation_ = 0;

private:
    Evaluator evaluator_;
    EvaluationSink* sink_ = nullptr;
    std::size_t allowance_ = 0;
    std::size_t evaluations_ = 0;
    IndividualId next_id_ = 0;
};

/// Throws std::invalid_argument for an unknown method name.
std::unique_ptr<Optimizer> make_optimizer(const MethodSpec& spec, const Domain& domain, std::uint64_t seed,
                                          std::size_t workers = 1);

struct RunOptions {
    std::size_t workers = 1;
    std::size_t top_n = 10;
    bool keep_log = true;
};

/// Runs generations until exactly `budget` evaluations were made. Metrics rows are emitted every
/// lambda evaluations. Throws InvalidConfiguration when budget < lambda.
RunRecord run(const MethodSpec& spec, const Domain& domain, std::size_t budget, std::uint64_t seed,
              const RunOptions& options = {});

} // namespace qd
