#include "qd/optimizer.hpp"

#include <algorithm>
#include <stdexcept>

#include "qd/emitters.hpp"
#include "qd/errors.hpp"
#include "qd/novelty.hpp"
#include "qd/selection.hpp"

namespace qd {

namespace {

constexpr std::uint64_t kMethodStream = 0xFFFFFFFF00000000ULL;
constexpr std::uint64_t kChildStream = 1ULL << 62;
constexpr std::uint64_t kSereneStream = 0x5E00000000000000ULL;

std::vector<std::optional<IndividualId>> no_parents(std::size_t n)
{
    return std::vector<std::optional<IndividualId>>(n);
}

std::vector<Individual> merge(const std::vector<Individual>& a, const std::vector<Individual>& b)
{
    std::vector<Individual> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

std::vector<Individual> pick(std::span<const Individual> pool, const Selection& sel)
{
    std::vector<Individual> out;
    out.reserve(sel.size());
    for (std::size_t i : sel)
        out.push_back(pool[i]);
    return out;
}

} // namespace

Optimizer::Optimizer(const MethodSpec& spec, const Domain& domain, std::uint64_t seed, std::size_t workers)
    : spec_(spec), params_(spec_.params), domain_(domain), domain_spec_(domain.spec()), seed_(seed),
      rng_(Rng::derive(seed, kMethodStream)), evaluator_(domain, workers)
{
}

std::size_t Optimizer::run_generation(EvaluationSink& sink, std::size_t max_evaluations)
{
    if (max_evaluations == 0)
        return 0;
    sink_ = &sink;
    allowance_ = max_evaluations;
    const std::size_t before = evaluations_;
    step(max_evaluations);
    sink_ = nullptr;
    allowance_ = 0;
    ++generation_;
    return evaluations_ - before;
}

std::vector<Individual> Optimizer::evaluate(std::vector<Genome> genomes,
                                            std::span<const std::optional<IndividualId>> parents, int generation)
{
    const std::vector<int> generations(genomes.size(), generation);
    return evaluate(std::move(genomes), parents, generations);
}

std::vector<Individual> Optimizer::evaluate(std::vector<Genome> genomes,
                                            std::span<const std::optional<IndividualId>> parents,
                                            std::span<const int> generations)
{
    if (!sink_)
        throw InvalidState("evaluate called outside run_generation");
    const std::size_t n = std::min(genomes.size(), allowance_);
    genomes.resize(n);
    const std::vector<Evaluation> evals = evaluator_.evaluate(genomes);

    std::vector<Individual> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Individual ind;
        ind.id = next_id_++;
        ind.parent_id = i < parents.size() ? parents[i] : std::nullopt;
        ind.generation = generations[i];
        ind.genome = std::move(genomes[i]);
        ind.evaluation = evals[i];
        sink_->record(ind);
        out.push_back(std::move(ind));
    }
    allowance_ -= n;
    evaluations_ += n;
    return out;
}

std::vector<Individual> Optimizer::evaluate_random(std::size_t count, int generation)
{
    count = std::min(count, allowance_);
    std::vector<Genome> genomes;
    genomes.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        genomes.push_back(uniform_random_genome(domain_spec_.genome_length, rng_));
    return evaluate(std::move(genomes), no_parents(count), generation);
}

Genome Optimizer::mutate(const Individual& parent, IndividualId child_id) const
{
    Rng rng = Rng::derive(seed_, kChildStream | child_id);
    return gaussian_mutate(parent.genome, params_.mutation_sigma, params_.mutation_prob, rng);
}

namespace {

class RandomSearch final : public Optimizer {
public:
    using Optimizer::Optimizer;

protected:
    void step(std::size_t) override { evaluate_random(params_.lambda, generation_); }
};

enum class Survival { Novelty, Fitness, NoveltyLocalQuality, NoveltyTournament };

// Population-based search: mu survivors chosen over parents and offspring.
class PopulationSearch : public Optimizer {
public:
    PopulationSearch(const MethodSpec& spec, const Domain& domain, std::uint64_t seed, std::size_t workers,
                     Survival survival, std::size_t novelty_additions)
        : Optimizer(spec, domain, seed, workers), survival_(survival), novelty_additions_(novelty_additions)
    {
    }

protected:
    void step(std::size_t) override { advance(params_.lambda); }

    /// One population generation limited to `limit` evaluations. Returns the new individuals.
    std::vector<Individual> advance(std::size_t limit)
    {
        if (population_.empty()) {
            population_ = evaluate_random(std::min(params_.mu, limit), generation_);
            return population_;
        }

        const std::size_t n = std::min({params_.lambda, limit, remaining()});
        std::vector<Genome> genomes;
        std::vector<std::optional<IndividualId>> parents;
        std::vector<int> generations;
        for (std::size_t j = 0; j < n; ++j) {
            const Individual& parent = population_[j % population_.size()];
            genomes.push_back(mutate(parent, next_id() + j));
            parents.push_back(parent.id);
            generations.push_back(parent.generation + 1);
        }
        std::vector<Individual> offspring = evaluate(std::move(genomes), parents, generations);

        const std::vector<Individual> pool = merge(population_, offspring);
        population_ = pick(pool, survivors(pool));
        archive_.add(offspring, novelty_additions_, rng_);
        return offspring;
    }

    Selection survivors(std::span<const Individual> pool)
    {
        std::vector<Vector> refs;
        if (survival_ != Survival::Fitness) {
            refs = archive_.descriptors();
            for (const auto& ind : pool)
                if (ind.eligible() || survival_ != Survival::NoveltyTournament)
                    refs.push_back(placeholder_descriptor(ind.evaluation, domain_spec_.descriptor_dim));
        }
        SelectionContext ctx{pool, refs, archive_.entries(), domain_spec_.descriptor_dim, params_.k,
                             params_.local_neighbors, rng_};
        switch (survival_) {
        case Survival::Novelty:
            return select_novelty_desc(ctx, params_.mu);
        case Survival::Fitness:
            return select_fitness_desc(ctx, params_.mu);
        case Survival::NoveltyLocalQuality:
            return select_pareto_novelty(ctx, params_.mu, ParetoQuality::LocalQuality);
        case Survival::NoveltyTournament:
            return tournament_eligible(ctx, params_.mu, params_.tournament_size);
        }
        throw InvalidState("unhandled survival rule");
    }

    Survival survival_;
    std::size_t novelty_additions_;
    std::vector<Individual> population_;
    NoveltyArchive archive_;
};

// Novelty search exploration plus CMA-ES emitters started from rewarding solutions.
class Serene final : public PopulationSearch {
public:
    Serene(const MethodSpec& spec, const Domain& domain, std::uint64_t seed, std::size_t workers)
        : PopulationSearch(spec, domain, seed, workers, Survival::Novelty, spec.params.serene_novelty_additions)
    {
    }

protected:
    // One chunk of the budget.
    void step(std::size_t max_evaluations) override
    {
        const std::size_t chunk = std::min(params_.serene_chunk, max_evaluations);
        const SereneAllocation alloc = serene_schedule(chunk, candidates_.size(), emitters_.size());
        if (alloc.spawn)
            spawn();

        std::size_t used = 0;
        std::vector<SereneEmitter> kept;
        for (std::size_t i = 0; i < emitters_.size(); ++i) {
            const std::size_t budget = i < alloc.emitter_budgets.size() ? alloc.emitter_budgets[i] : 0;
            const auto [spent, retired] = exploit(emitters_[i], budget);
            used += spent;
            if (!retired)
                kept.push_back(std::move(emitters_[i]));
        }
        emitters_ = std::move(kept);

        std::size_t explore = chunk - used;
        while (explore > 0) {
            const std::vector<Individual> fresh = advance(explore);
            if (fresh.empty())
                break;
            explore -= fresh.size();
            for (const auto& ind : fresh)
                if (ind.success())
                    candidates_.push_back(ind);
        }
    }

private:
    void spawn()
    {
        const auto pick = candidates_.begin() + static_cast<std::ptrdiff_t>(rng_.below(candidates_.size()));
        SereneEmitter e{CmaEs(pick->genome.values(), params_.serene_sigma0, params_.serene_emitter_population),
                        Rng::derive(seed_, kSereneStream + spawned_++), pick->id, pick->fitness(), 0};
        candidates_.erase(pick);
        emitters_.push_back(std::move(e));
    }

    std::pair<std::size_t, bool> exploit(SereneEmitter& e, std::size_t budget)
    {
        std::size_t spent = 0;
        while (spent < budget) {
            if (e.cma.needs_restart())
                return {spent, true};
            const std::size_t n = std::min(params_.serene_emitter_population, budget - spent);
            std::vector<Individual> batch =
                evaluate(e.cma.ask(e.rng, n), no_parents(n), generation_);
            if (batch.empty())
                break;
            spent += batch.size();
            const std::vector<std::size_t> order = fitness_ranking(batch);
            if (batch.size() >= 2) {
                std::vector<Genome> ranked;
                for (std::size_t i : order)
                    ranked.push_back(batch[i].genome);
                e.cma.tell(ranked);
            }
            if (e.observe(batch[order.front()].fitness(), params_.serene_patience))
                return {spent, true};
        }
        return {spent, false};
    }

    std::vector<Individual> candidates_;
    std::vector<SereneEmitter> emitters_;
    std::uint64_t spawned_ = 0;
};

enum class ParentRule { Random, SuccessPriority, Fitness, Novelty, NoveltyFitness, SuccessNovelty };

class MapElites final : public Optimizer {
public:
    MapElites(const MethodSpec& spec, const Domain& domain, std::uint64_t seed, std::size_t workers, ParentRule rule)
        : Optimizer(spec, domain, seed, workers), rule_(rule),
          archive_(domain_spec_.descriptor_bounds, domain_spec_.bins)
    {
    }

    const GridArchive* container() const override { return &archive_; }

protected:
    void step(std::size_t) override
    {
        if (!initialized_) {
            initialized_ = true;
            store(evaluate_random(params_.mu, generation_));
            return;
        }
        if (archive_.empty()) {
            store(evaluate_random(params_.lambda, generation_));
            return;
        }

        std::vector<Individual> pool;
        std::vector<Vector> refs;
        for (const Elite* e : archive_.elites()) {
            pool.push_back(e->individual);
            refs.push_back(e->descriptor);
        }
        SelectionContext ctx{pool, refs, {}, domain_spec_.descriptor_dim, params_.k, params_.local_neighbors, rng_};
        const std::size_t n = std::min(params_.lambda, remaining());
        const Selection parents = select(ctx, n);

        std::vector<Genome> genomes;
        std::vector<std::optional<IndividualId>> parent_ids;
        std::vector<int> generations;
        for (std::size_t j = 0; j < n; ++j) {
            const Individual& parent = pool[parents[j]];
            genomes.push_back(mutate(parent, next_id() + j));
            parent_ids.push_back(parent.id);
            generations.push_back(parent.generation + 1);
        }
        store(evaluate(std::move(genomes), parent_ids, generations));
    }

private:
    Selection select(SelectionContext& ctx, std::size_t n)
    {
        switch (rule_) {
        case ParentRule::Random:
            return select_random(ctx, n);
        case ParentRule::SuccessPriority:
            return select_success_priority(ctx, n);
        case ParentRule::Fitness:
            return select_fitness_desc(ctx, n);
        case ParentRule::Novelty:
            return select_novelty_desc(ctx, n);
        case ParentRule::NoveltyFitness:
            return select_pareto_novelty(ctx, n, ParetoQuality::Fitness);
        case ParentRule::SuccessNovelty:
            return select_success_then_novelty(ctx, n);
        }
        throw InvalidState("unhandled parent rule");
    }

    void store(const std::vector<Individual>& batch)
    {
        for (const auto& ind : batch)
            if (ind.eligible())
                archive_.insert(ind);
    }

    ParentRule rule_;
    GridArchive archive_;
    bool initialized_ = false;
};

enum class Ranking { Fitness, Improvement, Annealed };

// A pool of CMA-ES emitters; one generation asks every emitter for one batch.
class CmaFamily final : public Optimizer {
public:
    CmaFamily(const MethodSpec& spec, const Domain& domain, std::uint64_t seed, std::size_t workers, Ranking ranking)
        : Optimizer(spec, domain, seed, workers), ranking_(ranking),
          pool_(params_.cma_emitters, params_.cma_batch, params_.cma_sigma0, domain_spec_.genome_length, seed)
    {
        if (ranking != Ranking::Fitness) {
            archive_.emplace(domain_spec_.descriptor_bounds, domain_spec_.bins);
            if (ranking == Ranking::Annealed)
                archive_->enable_thresholds(params_.mae_f_min);
        }
    }

    const GridArchive* container() const override { return archive_ ? &*archive_ : nullptr; }

protected:
    void step(std::size_t) override
    {
        // Samples come from a distribution rather than a single parent, so they carry no parent id.
        std::vector<Genome> genomes;
        std::vector<std::size_t> counts;
        for (std::size_t i = 0; i < pool_.size(); ++i) {
            Emitter& e = pool_[i];
            if (e.cma.needs_restart())
                restart(i);
            const std::size_t n = std::min(pool_.batch_size(), remaining() - genomes.size());
            std::vector<Genome> batch = e.cma.ask(e.rng, n);
            counts.push_back(batch.size());
            for (auto& g : batch)
                genomes.push_back(std::move(g));
        }
        const std::size_t total = genomes.size();
        const std::vector<Individual> all = evaluate(std::move(genomes), no_parents(total), generation_);

        std::size_t offset = 0;
        for (std::size_t i = 0; i < pool_.size(); ++i) {
            const std::span<const Individual> batch(all.data() + offset, counts[i]);
            offset += counts[i];
            if (batch.empty())
                continue;
            Emitter& e = pool_[i];
            std::vector<std::size_t> order;
            bool accepted = true;
            switch (ranking_) {
            case Ranking::Fitness:
                order = fitness_ranking(batch);
                break;
            case Ranking::Improvement: {
                EmitterRanking r = cma_me_rank(batch, *archive_, domain_spec_.descriptor_dim);
                order = std::move(r.order);
                accepted = r.any_accepted();
                break;
            }
            case Ranking::Annealed: {
                EmitterRanking r = cma_mae_rank(batch, *archive_, params_.mae_alpha, domain_spec_.descriptor_dim);
                order = std::move(r.order);
                accepted = r.any_accepted();
                break;
            }
            }
            if (batch.size() >= 2) {
                std::vector<Genome> ranked;
                ranked.reserve(batch.size());
                for (std::size_t j : order)
                    ranked.push_back(batch[j].genome);
                e.cma.tell(ranked);
            }
            e.rejected_streak = accepted ? 0 : e.rejected_streak + 1;
            if (e.rejected_streak >= params_.cma_restart_patience)
                restart(i);
        }
    }

private:
    void restart(std::size_t i)
    {
        if (archive_ && !archive_->empty()) {
            const std::vector<std::size_t> cells = archive_->occupied_cells();
            const Elite& elite = *archive_->elite(cells[rng_.below(cells.size())]);
            pool_.restart(i, elite.individual.genome.values(), elite.individual.id);
        } else {
            pool_.restart(i, uniform_random_genome(domain_spec_.genome_length, rng_).values(), std::nullopt);
        }
    }

    Ranking ranking_;
    EmitterPool pool_;
    std::optional<GridArchive> archive_;
};

} // namespace

std::unique_ptr<Optimizer> make_optimizer(const MethodSpec& spec, const Domain& domain, std::uint64_t seed,
                                          std::size_t workers)
{
    const std::string& n = spec.name;
    auto population = [&](Survival s) {
        return std::make_unique<PopulationSearch>(spec, domain, seed, workers, s, spec.params.novelty_additions);
    };
    auto me = [&](ParentRule r) { return std::make_unique<MapElites>(spec, domain, seed, workers, r); };
    auto cma = [&](Ranking r) { return std::make_unique<CmaFamily>(spec, domain, seed, workers, r); };

    if (n == "Random")
        return std::make_unique<RandomSearch>(spec, domain, seed, workers);
    if (n == "NS")
        return population(Survival::Novelty);
    if (n == "Fit")
        return population(Survival::Fitness);
    if (n == "NSLC")
        return population(Survival::NoveltyLocalQuality);
    if (n == "NSMBS")
        return population(Survival::NoveltyTournament);
    if (n == "SERENE")
        return std::make_unique<Serene>(spec, domain, seed, workers);
    if (n == "ME-rand")
        return me(ParentRule::Random);
    if (n == "ME-scs")
        return me(ParentRule::SuccessPriority);
    if (n == "ME-fit")
        return me(ParentRule::Fitness);
    if (n == "ME-nov")
        return me(ParentRule::Novelty);
    if (n == "ME-nov-fit")
        return me(ParentRule::NoveltyFitness);
    if (n == "ME-nov-scs")
        return me(ParentRule::SuccessNovelty);
    if (n == "CMA-ES")
        return cma(Ranking::Fitness);
    if (n == "CMA-ME")
        return cma(Ranking::Improvement);
    if (n == "CMA-MAE")
        return cma(Ranking::Annealed);
    throw std::invalid_argument("unknown method '" + n + "'");
}

RunRecord run(const MethodSpec& spec, const Domain& domain, std::size_t budget, std::uint64_t seed,
              const RunOptions& options)
{
    if (budget < spec.params.lambda)
        throw InvalidConfiguration("budget", "must be at least lambda");
    auto optimizer = make_optimizer(spec, domain, seed, options.workers);
    OutcomeRecorder recorder(domain.spec(), spec.params.lambda, options.top_n, options.keep_log);
    while (optimizer->evaluations() < budget) {
        if (optimizer->run_generation(recorder, budget - optimizer->evaluations()) == 0)
            throw InvalidState("method '" + spec.name + "' stopped producing evaluations");
    }
    recorder.finish();

    RunRecord record(recorder.archive());
    record.method = spec.name;
    record.domain = domain.name();
    record.seed = seed;
    record.budget = budget;
    record.rows = recorder.rows();
    record.log = recorder.log();
    if (const GridArchive* c = optimizer->container())
        record.method_archive = *c;
    return record;
}

} // namespace qd
