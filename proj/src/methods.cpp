#include "qd/methods.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "qd/errors.hpp"

namespace qd {

namespace {

using R = Root;
using C = Container;
using P = PopulationKind;
using G = Goal;

struct Row {
    std::string name;
    Taxonomy taxonomy;
};

// Method taxonomy; the four extra MAP-Elites variants share ME-rand's row.
const std::vector<Row>& registry()
{
    static const std::vector<Row> rows = {
        {"Random", {{R::None}, {C::None}, {P::PP}, {}}},
        {"NS", {{R::NS}, {C::UA}, {P::PP}, {G::Coverage, G::Optimum}}},
        {"Fit", {{R::None}, {C::UA}, {P::PP}, {G::Optimum}}},
        {"NSLC", {{R::NS}, {C::UA}, {P::PP}, {G::RIBS}}},
        {"NSMBS", {{R::NS}, {C::UA}, {P::PP}, {G::Coverage}}},
        {"SERENE", {{R::NS}, {C::UA}, {P::PP}, {G::RIBS}}},
        {"ME-rand", {{R::ME}, {C::SA}, {P::NPP}, {G::RIBS}}},
        {"ME-scs", {{R::ME}, {C::SA}, {P::NPP}, {G::RIBS}}},
        {"ME-fit", {{R::ME}, {C::SA}, {P::NPP}, {G::RIBS}}},
        {"ME-nov", {{R::ME}, {C::SA}, {P::NPP}, {G::RIBS}}},
        {"ME-nov-fit", {{R::ME}, {C::SA}, {P::NPP}, {G::RIBS}}},
        {"ME-nov-scs", {{R::ME}, {C::SA}, {P::NPP}, {G::RIBS}}},
        {"CMA-ES", {{R::None}, {C::None}, {P::PP}, {G::Optimum}}},
        {"CMA-ME", {{R::ME}, {C::SA}, {P::NPP}, {G::RIBS}}},
        {"CMA-MAE", {{R::ME}, {}, {P::NPP}, {G::RIBS}}},
    };
    return rows;
}

enum class Kind { Count, PositiveCount, Positive, Probability, Unit, Real };

struct Key {
    std::string name;
    Kind kind;
    std::function<void(Hyperparameters&, double)> set;
};

template <typename T>
std::function<void(Hyperparameters&, double)> setter(T Hyperparameters::*field)
{
    return [field](Hyperparameters& h, double v) { h.*field = static_cast<T>(v); };
}

const std::vector<Key>& keys()
{
    using H = Hyperparameters;
    static const std::vector<Key> k = {
        {"mu", Kind::PositiveCount, setter(&H::mu)},
        {"lambda", Kind::PositiveCount, setter(&H::lambda)},
        {"n_add", Kind::Count, setter(&H::novelty_additions)},
        {"k", Kind::PositiveCount, setter(&H::k)},
        {"mutation_sigma", Kind::Positive, setter(&H::mutation_sigma)},
        {"mutation_prob", Kind::Probability, setter(&H::mutation_prob)},
        {"tournament_size", Kind::PositiveCount, setter(&H::tournament_size)},
        {"k_local", Kind::PositiveCount, setter(&H::local_neighbors)},
        {"serene_chunk", Kind::PositiveCount, setter(&H::serene_chunk)},
        {"serene_pop", Kind::PositiveCount, setter(&H::serene_emitter_population)},
        {"serene_n_add", Kind::Count, setter(&H::serene_novelty_additions)},
        {"serene_sigma0", Kind::Positive, setter(&H::serene_sigma0)},
        {"serene_patience", Kind::PositiveCount, setter(&H::serene_patience)},
        {"cma_batch", Kind::PositiveCount, setter(&H::cma_batch)},
        {"cma_emitters", Kind::PositiveCount, setter(&H::cma_emitters)},
        {"cma_sigma0", Kind::Positive, setter(&H::cma_sigma0)},
        {"cma_restart_patience", Kind::PositiveCount, setter(&H::cma_restart_patience)},
        {"mae_alpha", Kind::Unit, setter(&H::mae_alpha)},
        {"mae_f_min", Kind::Real, setter(&H::mae_f_min)},
    };
    return k;
}

void check(const Key& key, double v)
{
    auto fail = [&](const char* what) { throw InvalidConfiguration(key.name, what); };
    if (!std::isfinite(v))
        fail("must be finite");
    switch (key.kind) {
    case Kind::Count:
    case Kind::PositiveCount:
        if (v != std::floor(v) || v < 0)
            fail("must be a non-negative integer");
        if (key.kind == Kind::PositiveCount && v < 1)
            fail("must be at least 1");
        break;
    case Kind::Positive:
        if (!(v > 0))
            fail("must be positive");
        break;
    case Kind::Probability:
    case Kind::Unit:
        if (v < 0 || v > 1)
            fail("must lie in [0, 1]");
        break;
    case Kind::Real:
        break;
    }
}

} // namespace

std::vector<std::string> hyperparameter_keys()
{
    std::vector<std::string> out;
    for (const auto& k : keys())
        out.push_back(k.name);
    return out;
}

const std::vector<std::string>& method_names()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& row : registry())
            n.push_back(row.name);
        return n;
    }();
    return names;
}

MethodSpec build_method(std::string_view name, const std::map<std::string, double>& overrides)
{
    const Row* row = nullptr;
    for (const auto& r : registry())
        if (r.name == name)
            row = &r;
    if (!row)
        throw std::invalid_argument("unknown method '" + std::string(name) + "'");

    MethodSpec spec{row->name, row->taxonomy, {}};
    for (const auto& [key, value] : overrides) {
        const Key* k = nullptr;
        for (const auto& candidate : keys())
            if (candidate.name == key)
                k = &candidate;
        if (!k)
            throw InvalidConfiguration(key, "unknown hyperparameter");
        check(*k, value);
        k->set(spec.params, value);
    }
    return spec;
}

std::string to_string(Root r)
{
    switch (r) {
    case Root::NS:
        return "NS";
    case Root::ME:
        return "ME";
    case Root::None:
        return "none";
    }
    return "?";
}

std::string to_string(Container c)
{
    switch (c) {
    case Container::UA:
        return "UA";
    case Container::SA:
        return "SA";
    case Container::None:
        return "none";
    }
    return "?";
}

std::string to_string(PopulationKind p)
{
    return p == PopulationKind::PP ? "PP" : "NPP";
}

std::string to_string(Goal g)
{
    switch (g) {
    case Goal::RIBS:
        return "RIBS";
    case Goal::Coverage:
        return "coverage";
    case Goal::Optimum:
        return "optimum";
    }
    return "?";
}

} // namespace qd
