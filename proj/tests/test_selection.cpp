#include <doctest.h>

#include <algorithm>
#include <map>

#include "helpers.hpp"
#include "qd/errors.hpp"
#include "qd/selection.hpp"

using namespace qd;
using qd::test::make_individual;

namespace {

struct Fixture {
    std::vector<Individual> pool;
    std::vector<Vector> refs;
    std::vector<NoveltyEntry> archive;
    Rng rng{1};

    SelectionContext ctx() { return SelectionContext{pool, refs, archive, 2, 15, 50, rng}; }
};

// Exhaustive dominance: front of i = longest chain of dominators above it.
std::vector<int> brute_front_ranks(const std::vector<double>& a, const std::vector<double>& b)
{
    const std::size_t n = a.size();
    auto dom = [&](std::size_t i, std::size_t j) {
        return a[i] >= a[j] && b[i] >= b[j] && (a[i] > a[j] || b[i] > b[j]);
    };
    std::vector<int> rank(n, -1);
    std::vector<bool> done(n, false);
    for (int front = 0; std::count(done.begin(), done.end(), false) > 0; ++front) {
        std::vector<std::size_t> now;
        for (std::size_t i = 0; i < n; ++i) {
            if (done[i])
                continue;
            bool dominated = false;
            for (std::size_t j = 0; j < n; ++j)
                if (!done[j] && dom(j, i))
                    dominated = true;
            if (!dominated)
                now.push_back(i);
        }
        for (std::size_t i : now) {
            rank[i] = front;
            done[i] = true;
        }
    }
    return rank;
}

std::vector<int> ranks_of(const std::vector<std::vector<std::size_t>>& fronts, std::size_t n)
{
    std::vector<int> r(n, -1);
    for (std::size_t f = 0; f < fronts.size(); ++f)
        for (std::size_t i : fronts[f])
            r[i] = static_cast<int>(f);
    return r;
}

} // namespace

TEST_SUITE("selection") {

TEST_CASE("empty pool is an invalid state")
{
    Fixture fx;
    auto ctx = fx.ctx();
    CHECK_THROWS_AS(select_random(ctx, 1), InvalidState);
    CHECK_THROWS_AS(select_fitness_desc(ctx, 1), InvalidState);
    CHECK_THROWS_AS(select_success_priority(ctx, 1), InvalidState);
    CHECK_THROWS_AS(select_novelty_desc(ctx, 1), InvalidState);
    CHECK_THROWS_AS(select_pareto_novelty(ctx, 1, ParetoQuality::Fitness), InvalidState);
    CHECK_THROWS_AS(tournament_eligible(ctx, 1, 15), InvalidState);
}

TEST_CASE("random selection")
{
    Fixture fx;
    fx.pool.push_back(make_individual(7, Vector{0.0, 0.0}, 0.0));
    auto ctx = fx.ctx();
    CHECK(select_random(ctx, 3) == Selection{0, 0, 0});

    for (IndividualId id = 1; id < 4; ++id)
        fx.pool.push_back(make_individual(id, Vector{0.0, 0.0}, 0.0));
    auto ctx4 = fx.ctx();
    CHECK(select_random(ctx4, 100).size() == 100);
    std::vector<int> freq(4, 0);
    const Selection s = select_random(ctx4, 100000);
    for (std::size_t i : s)
        ++freq[i];
    for (int f : freq) {
        CHECK(f / 100000.0 >= 0.24);
        CHECK(f / 100000.0 <= 0.26);
    }
}

TEST_CASE("fitness descending selection")
{
    Fixture fx;
    fx.pool = {make_individual(1, Vector{0, 0}, 0.2, true), make_individual(2, Vector{0, 0}, 0.9, true),
               make_individual(3, Vector{0, 0}, 0.5, true)};
    auto ctx = fx.ctx();
    CHECK(select_fitness_desc(ctx, 2) == Selection{1, 2});
    CHECK(select_fitness_desc(ctx, 7) == Selection{1, 2, 0, 1, 2, 0, 1});

    Fixture eq;
    eq.pool = {make_individual(9, Vector{0, 0}, 0.0), make_individual(4, Vector{0, 0}, 0.0),
               make_individual(6, Vector{0, 0}, 0.0)};
    auto c2 = eq.ctx();
    CHECK(select_fitness_desc(c2, 3) == Selection{1, 2, 0});
}

TEST_CASE("success priority with few successes")
{
    Fixture fx;
    for (IndividualId id = 0; id < 50; ++id)
        fx.pool.push_back(make_individual(id, Vector{0, 0}, id % 17 == 0 ? 0.5 : 0.0, id % 17 == 0));
    auto ctx = fx.ctx();
    const Selection s = select_success_priority(ctx, 100);
    REQUIRE(s.size() == 100);
    for (std::size_t i : {0, 17, 34})
        CHECK(std::find(s.begin(), s.end(), i) != s.end());
    CHECK(s[0] == 0);
    CHECK(s[1] == 17);
    CHECK(s[2] == 34);
}

TEST_CASE("success priority without successes equals random selection")
{
    Fixture a, b;
    for (IndividualId id = 0; id < 30; ++id) {
        a.pool.push_back(make_individual(id, Vector{0, 0}, 0.0));
        b.pool.push_back(make_individual(id, Vector{0, 0}, 0.0));
    }
    a.rng = Rng(99);
    b.rng = Rng(99);
    auto ca = a.ctx();
    auto cb = b.ctx();
    CHECK(select_success_priority(ca, 100) == select_random(cb, 100));
}

TEST_CASE("success priority with many successes returns only successes")
{
    Fixture fx;
    for (IndividualId id = 0; id < 400; ++id)
        fx.pool.push_back(make_individual(id, Vector{0, 0}, id % 2 ? 0.4 : 0.0, id % 2 == 1));
    auto ctx = fx.ctx();
    const Selection s = select_success_priority(ctx, 100);
    REQUIRE(s.size() == 100);
    for (std::size_t i : s)
        CHECK(fx.pool[i].success());
}

TEST_CASE("novelty descending selection")
{
    Fixture one;
    one.pool = {make_individual(1, Vector{0.5, 0.5}, 0.0)};
    one.refs = {{0.5, 0.5}};
    auto c1 = one.ctx();
    CHECK(select_novelty_desc(c1, 1) == Selection{0});

    // Individual 0 is duplicated in the references, so 1 is more novel.
    Fixture two;
    two.pool = {make_individual(1, Vector{0.0, 0.0}, 0.0), make_individual(2, Vector{1.0, 0.0}, 0.0)};
    two.refs = {{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}};
    auto c2 = two.ctx();
    c2.k = 2;
    CHECK(select_novelty_desc(c2, 2) == Selection{1, 0});
    CHECK(select_novelty_desc(c2, 5) == Selection{1, 0, 1, 0, 1});
}

TEST_CASE("non-eligible individuals use the placeholder")
{
    Fixture fx;
    fx.pool = {make_individual(1, std::nullopt, 0.0), make_individual(2, Vector{0.9, 0.9}, 0.0)};
    fx.refs = {{0.0, 0.0}, {0.9, 0.9}};
    auto ctx = fx.ctx();
    ctx.k = 1;
    const auto nov = pool_novelty(ctx);
    CHECK(nov[0] == 0.0);
    CHECK(nov[1] == 0.0);
}

TEST_CASE("success then novelty")
{
    Fixture fx;
    fx.pool = {make_individual(1, Vector{0.0, 0.0}, 0.0), make_individual(2, Vector{0.1, 0.0}, 0.3, true),
               make_individual(3, Vector{0.9, 0.9}, 0.0), make_individual(4, Vector{0.5, 0.0}, 0.2, true)};
    fx.refs = {{0.0, 0.0}, {0.1, 0.0}, {0.9, 0.9}, {0.5, 0.0}};
    auto ctx = fx.ctx();
    ctx.k = 2;
    const Selection s = select_success_then_novelty(ctx, 4);
    CHECK(s == Selection{3, 1, 2, 0});
}

TEST_CASE("pareto fronts match the dominance oracle")
{
    const std::vector<double> a{3, 2, 1, 0.5}, b{3, 1, 2, 0.5};
    const auto fronts = non_dominated_fronts(a, b);
    REQUIRE(fronts.size() == 3);
    CHECK(fronts[0] == std::vector<std::size_t>{0});
    CHECK(fronts[1] == std::vector<std::size_t>{1, 2});
    CHECK(fronts[2] == std::vector<std::size_t>{3});

    Rng rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.below(40);
        std::vector<double> x, y;
        for (std::size_t i = 0; i < n; ++i) {
            x.push_back(static_cast<double>(rng.below(6)));
            y.push_back(static_cast<double>(rng.below(6)));
        }
        REQUIRE(ranks_of(non_dominated_fronts(x, y), n) == brute_front_ranks(x, y));
    }
}

TEST_CASE("pareto selection")
{
    std::vector<Individual> pool;
    for (IndividualId id = 0; id < 4; ++id)
        pool.push_back(make_individual(id, Vector{0, 0}, 0.0));
    const std::vector<double> nov{1.0, 5.0, 2.0, 4.0}, q{1.0, 5.0, 3.0, 0.0};
    CHECK(select_pareto(pool, nov, q, 1) == Selection{1});
    // Front 0 = {1}; front 1 = {2, 3}, filled by novelty; front 2 = {0}.
    CHECK(select_pareto(pool, nov, q, 4) == Selection{1, 3, 2, 0});

    const std::vector<double> nov2{1.0, 2.0}, q2{2.0, 1.0};
    const Selection both = select_pareto(std::span(pool).first(2), nov2, q2, 2);
    CHECK(std::is_permutation(both.begin(), both.end(), Selection{0, 1}.begin()));
}

TEST_CASE("pareto fronts are invariant under monotone transforms")
{
    Rng rng(22);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> x, y, tx, ty;
        for (int i = 0; i < 30; ++i) {
            x.push_back(rng.uniform());
            y.push_back(static_cast<double>(rng.below(5)));
            tx.push_back(std::exp(3.0 * x.back()) - 7.0);
            ty.push_back(y.back() * y.back() * y.back() + 2.0);
        }
        REQUIRE(non_dominated_fronts(x, y) == non_dominated_fronts(tx, ty));
    }
}

TEST_CASE("local quality")
{
    const std::vector<Vector> nd{{0.1, 0.0}, {0.2, 0.0}, {0.3, 0.0}, {0.4, 0.0}, {5.0, 0.0}};
    const std::vector<double> nf{0.1, 0.5, 0.2, 0.9, 0.0};
    // The four nearest are the first four; fitnesses below 0.4 are 0.1 and 0.2.
    CHECK(local_quality(Vector{0.0, 0.0}, 0.4, nd, nf, 4) == 2);
    CHECK(local_quality(Vector{0.0, 0.0}, 0.4, nd, nf, 50) == 3);
    CHECK(local_quality(Vector{0.0, 0.0}, 1.0, nd, nf, 50) == 5);

    std::vector<Vector> many;
    std::vector<double> zeros;
    for (int i = 0; i < 80; ++i) {
        many.push_back({0.01 * i, 0.0});
        zeros.push_back(0.0);
    }
    CHECK(local_quality(Vector{0.0, 0.0}, 0.5, many, zeros, 50) == 50);
    CHECK(local_quality(Vector{0.0, 0.0}, 0.0, many, zeros, 50) == 0);
}

TEST_CASE("pool local quality counts pool and archive neighbours")
{
    Fixture fx;
    fx.pool = {make_individual(1, Vector{0.0, 0.0}, 0.5, true), make_individual(2, Vector{0.1, 0.0}, 0.0)};
    fx.archive = {{{0.05, 0.0}, 0.2}, {{3.0, 3.0}, 0.0}};
    auto ctx = fx.ctx();
    ctx.local_neighbors = 2;
    const auto lq = pool_local_quality(ctx);
    CHECK(lq[0] == 2.0);
    CHECK(lq[1] == 0.0);
}

TEST_CASE("tournament among eligible members")
{
    Fixture fx;
    for (IndividualId id = 0; id < 15; ++id)
        fx.pool.push_back(make_individual(id, Vector{0.01 * id, 0.0}, 0.0));
    fx.pool.push_back(make_individual(15, std::nullopt, 0.0));
    fx.pool[9].evaluation.descriptor = Vector{0.9, 0.9};
    for (const auto& ind : fx.pool)
        if (ind.eligible())
            fx.refs.push_back(*ind.evaluation.descriptor);
    auto ctx = fx.ctx();
    const Selection s = tournament_eligible(ctx, 20, 15);
    for (std::size_t i : s)
        CHECK(i == 9);

    const Selection small = tournament_eligible(ctx, 500, 3);
    for (std::size_t i : small)
        CHECK(fx.pool[i].eligible());
}

TEST_CASE("tournament without eligible members falls back to random")
{
    Fixture a, b;
    for (IndividualId id = 0; id < 12; ++id) {
        a.pool.push_back(make_individual(id, std::nullopt, 0.0));
        b.pool.push_back(make_individual(id, std::nullopt, 0.0));
    }
    a.rng = Rng(5);
    b.rng = Rng(5);
    auto ca = a.ctx();
    auto cb = b.ctx();
    CHECK(tournament_eligible(ca, 200, 15) == select_random(cb, 200));
}

TEST_CASE("selectors return exactly count and are deterministic")
{
    auto build = [](std::uint64_t seed) {
        Fixture fx;
        fx.rng = Rng(seed);
        Rng g(77);
        for (IndividualId id = 0; id < 40; ++id) {
            const bool elig = g.bernoulli(0.6);
            const bool succ = elig && g.bernoulli(0.3);
            fx.pool.push_back(make_individual(id, elig ? std::optional<Vector>(Vector{g.uniform(), g.uniform()})
                                                       : std::nullopt,
                                              succ ? g.uniform(0.1, 1.0) : 0.0, succ));
            fx.refs.push_back(placeholder_descriptor(fx.pool.back().evaluation, 2));
        }
        return fx;
    };
    for (std::size_t count : {1, 39, 40, 100}) {
        Fixture a = build(3), b = build(3);
        auto ca = a.ctx();
        auto cb = b.ctx();
        CHECK(select_random(ca, count) == select_random(cb, count));
        CHECK(select_success_priority(ca, count) == select_success_priority(cb, count));
        CHECK(tournament_eligible(ca, count, 15) == tournament_eligible(cb, count, 15));
        CHECK(select_novelty_desc(ca, count).size() == count);
        CHECK(select_fitness_desc(ca, count).size() == count);
        CHECK(select_success_then_novelty(ca, count).size() == count);
        CHECK(select_pareto_novelty(ca, count, ParetoQuality::LocalQuality) ==
              select_pareto_novelty(cb, count, ParetoQuality::LocalQuality));
        const Selection s = select_success_priority(ca, count);
        const auto succ = std::count_if(s.begin(), s.end(), [&](std::size_t i) { return a.pool[i].success(); });
        const auto total = std::count_if(a.pool.begin(), a.pool.end(), [](const auto& i) { return i.success(); });
        CHECK(static_cast<std::size_t>(succ) >= std::min<std::size_t>(count, static_cast<std::size_t>(total)));
    }
}

}
