#include <doctest.h>

#include <map>
#include <sstream>

#include "helpers.hpp"
#include "qd/domains.hpp"
#include "qd/errors.hpp"
#include "qd/methods.hpp"
#include "qd/optimizer.hpp"

using namespace qd;

namespace {

// Eligible inside the unit disk, never successful.
class BarrenDomain final : public Domain {
public:
    BarrenDomain()
    {
        spec_.name = "barren";
        spec_.genome_length = 2;
        spec_.descriptor_dim = 2;
        spec_.descriptor_bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
        spec_.bins = {10, 10};
    }
    const DomainSpec& spec() const noexcept override { return spec_; }
    Evaluation evaluate(const Genome& g) const override
    {
        Evaluation e;
        if (g[0] * g[0] + g[1] * g[1] <= 1.0)
            e.descriptor = g.values();
        return e;
    }

private:
    DomainSpec spec_;
};

class CountingSink final : public EvaluationSink {
public:
    void record(const Individual& ind) override
    {
        CHECK((ids.empty() || ind.id > ids.back()));
        ids.push_back(ind.id);
        log.push_back(ind);
    }
    std::vector<IndividualId> ids;
    std::vector<Individual> log;
};

std::string metrics_text(const RunRecord& r)
{
    std::ostringstream out;
    write_metrics_csv(out, r.rows);
    return out.str();
}

std::string log_text(const RunRecord& r)
{
    std::ostringstream out;
    write_evaluation_log(out, r.log);
    return out.str();
}

Taxonomy row(std::vector<Root> r, std::vector<Container> c, std::vector<PopulationKind> p, std::vector<Goal> g)
{
    return {std::move(r), std::move(c), std::move(p), std::move(g)};
}

} // namespace

TEST_SUITE("algorithms") {

TEST_CASE("registry lists the fifteen methods")
{
    const std::vector<std::string> expected{"Random", "NS",     "Fit",        "NSLC",       "NSMBS",
                                            "SERENE", "ME-rand", "ME-scs",    "ME-fit",     "ME-nov",
                                            "ME-nov-fit", "ME-nov-scs", "CMA-ES", "CMA-ME", "CMA-MAE"};
    CHECK(method_names() == expected);
}

TEST_CASE("taxonomy rows")
{
    using R = Root;
    using C = Container;
    using P = PopulationKind;
    using G = Goal;
    const std::map<std::string, Taxonomy> table{
        {"Random", row({R::None}, {C::None}, {P::PP}, {})},
        {"NS", row({R::NS}, {C::UA}, {P::PP}, {G::Coverage, G::Optimum})},
        {"Fit", row({R::None}, {C::UA}, {P::PP}, {G::Optimum})},
        {"NSLC", row({R::NS}, {C::UA}, {P::PP}, {G::RIBS})},
        {"NSMBS", row({R::NS}, {C::UA}, {P::PP}, {G::Coverage})},
        {"SERENE", row({R::NS}, {C::UA}, {P::PP}, {G::RIBS})},
        {"ME-rand", row({R::ME}, {C::SA}, {P::NPP}, {G::RIBS})},
        {"ME-scs", row({R::ME}, {C::SA}, {P::NPP}, {G::RIBS})},
        {"CMA-ES", row({R::None}, {C::None}, {P::PP}, {G::Optimum})},
        {"CMA-ME", row({R::ME}, {C::SA}, {P::NPP}, {G::RIBS})},
        {"CMA-MAE", row({R::ME}, {}, {P::NPP}, {G::RIBS})},
    };
    for (const auto& [name, tax] : table)
        CHECK_MESSAGE(build_method(name).taxonomy == tax, name);
    for (const char* variant : {"ME-fit", "ME-nov", "ME-nov-fit", "ME-nov-scs"})
        CHECK(build_method(variant).taxonomy == table.at("ME-rand"));
}

TEST_CASE("build defaults and overrides")
{
    const MethodSpec ns = build_method("NS");
    CHECK(ns.params.mu == 100);
    CHECK(ns.params.lambda == 100);
    CHECK(ns.params.novelty_additions == 40);
    CHECK(ns.params.k == 15);
    CHECK(ns.params.mutation_sigma == 0.5);
    CHECK(ns.params.mutation_prob == 0.3);
    CHECK(ns.params.tournament_size == 15);
    CHECK(ns.params.cma_batch == 36);
    CHECK(ns.params.cma_emitters == 15);
    CHECK(ns.params.mae_alpha == 0.01);
    CHECK(ns.params.mae_f_min == -1.0);
    CHECK(ns.params.serene_chunk == 1000);
    CHECK(ns.params.serene_emitter_population == 6);
    CHECK(ns.params.serene_novelty_additions == 5);

    CHECK(build_method("NSLC", {{"k_local", 50}}).params.local_neighbors == 50);
    CHECK(build_method("NSLC", {{"k_local", 20}}).params.local_neighbors == 20);
    CHECK(build_method("Random").taxonomy.container == std::vector<Container>{Container::None});
}

TEST_CASE("build errors")
{
    CHECK_THROWS_AS(build_method("ME-best"), std::invalid_argument);
    try {
        build_method("NS", {{"kk", 3}});
        FAIL("expected an error");
    } catch (const InvalidConfiguration& e) {
        CHECK(e.key() == "kk");
    }
    try {
        build_method("NS", {{"mutation_prob", 1.5}});
        FAIL("expected an error");
    } catch (const InvalidConfiguration& e) {
        CHECK(e.key() == "mutation_prob");
    }
    CHECK_THROWS_AS(build_method("NS", {{"lambda", 0}}), InvalidConfiguration);
    CHECK_THROWS_AS(build_method("NS", {{"mu", 2.5}}), InvalidConfiguration);
    for (const auto& key : hyperparameter_keys())
        CHECK_NOTHROW(build_method("NS", {{key, 1}}));
}

TEST_CASE("one Random generation is lambda evaluations")
{
    const MicroDomain micro;
    auto opt = make_optimizer(build_method("Random"), micro, 1);
    CountingSink sink;
    CHECK(opt->run_generation(sink, 100000) == 100);
    CHECK(sink.ids.size() == 100);
    CHECK(opt->container() == nullptr);
}

TEST_CASE("one CMA-ME cycle is emitters times batch")
{
    const MicroDomain micro;
    auto opt = make_optimizer(build_method("CMA-ME"), micro, 1);
    CountingSink sink;
    CHECK(opt->run_generation(sink, 100000) == 15 * 36);
    CHECK(opt->container() != nullptr);
}

TEST_CASE("generations truncate at the limit")
{
    const MicroDomain micro;
    for (const auto& name : method_names()) {
        auto opt = make_optimizer(build_method(name), micro, 2);
        CountingSink sink;
        CHECK_MESSAGE(opt->run_generation(sink, 37) <= 37, name);
        CHECK(sink.ids.size() == opt->evaluations());
    }
}

TEST_CASE("every method spends exactly the budget")
{
    const MicroDomain micro;
    for (const auto& name : method_names()) {
        const RunRecord r = run(build_method(name), micro, 2150, 3);
        CHECK_MESSAGE(r.log.size() == 2150, name);
        REQUIRE(!r.rows.empty());
        CHECK(r.rows.back().evaluations == 2150);
        CHECK(r.rows.size() == 22);
        for (std::size_t i = 0; i < r.log.size(); ++i)
            REQUIRE(r.log[i].id == i);
    }
}

TEST_CASE("budget 20000 yields 200 rows")
{
    const MicroDomain micro;
    const RunRecord r = run(build_method("ME-rand"), micro, 20000, 1, {1, 10, false});
    CHECK(r.rows.size() == 200);
    CHECK(r.rows.back().evaluations == 20000);
    CHECK(r.log.empty());
}

TEST_CASE("budget below lambda is rejected")
{
    const MicroDomain micro;
    CHECK_THROWS_AS(run(build_method("NS"), micro, 99, 1), InvalidConfiguration);
}

TEST_CASE("runs are reproducible and independent of the worker count")
{
    const auto grasp = make_domain("planar-grasp");
    for (const char* name : {"NS", "SERENE", "ME-nov-scs", "CMA-MAE"}) {
        const RunRecord a = run(build_method(name), *grasp, 1500, 4, {1});
        const RunRecord b = run(build_method(name), *grasp, 1500, 4, {3});
        CHECK_MESSAGE(metrics_text(a) == metrics_text(b), name);
        CHECK(log_text(a) == log_text(b));
        const RunRecord c = run(build_method(name), *grasp, 1500, 5, {1});
        CHECK(log_text(a) != log_text(c));
    }
}

TEST_CASE("ME-scs without successes behaves like ME-rand")
{
    const BarrenDomain barren;
    const RunRecord scs = run(build_method("ME-scs"), barren, 2000, 6);
    const RunRecord rnd = run(build_method("ME-rand"), barren, 2000, 6);
    CHECK(log_text(scs) == log_text(rnd));
}

TEST_CASE("offspring are one generation after their parent")
{
    const auto grasp = make_domain("planar-grasp");
    for (const auto& name : method_names()) {
        const RunRecord r = run(build_method(name), *grasp, 1200, 7);
        for (const auto& ind : r.log)
            if (ind.parent_id)
                REQUIRE_MESSAGE(ind.generation == r.log[*ind.parent_id].generation + 1, name);
    }
}

TEST_CASE("methods never see the sink")
{
    // Same method, seed and domain with different sinks: identical evaluations.
    const auto grasp = make_domain("planar-grasp");
    for (const char* name : {"NSLC", "ME-scs", "CMA-ME"}) {
        auto a = make_optimizer(build_method(name), *grasp, 8);
        auto b = make_optimizer(build_method(name), *grasp, 8);
        CountingSink sa;
        OutcomeRecorder sb(grasp->spec(), 100);
        while (a->evaluations() < 1000)
            a->run_generation(sa, 1000 - a->evaluations());
        while (b->evaluations() < 1000)
            b->run_generation(sb, 1000 - b->evaluations());
        std::ostringstream la, lb;
        write_evaluation_log(la, sa.log);
        write_evaluation_log(lb, sb.log());
        CHECK(la.str() == lb.str());
    }
}

TEST_CASE("CMA-MAE keeps thresholds in its container")
{
    const MicroDomain micro;
    const RunRecord r = run(build_method("CMA-MAE"), micro, 1080, 2);
    REQUIRE(r.method_archive);
    CHECK(r.method_archive->has_thresholds());
    CHECK(r.method_archive->f_min() == -1.0);
}

}
