// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit when any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "qd/cma_es.hpp"
#include "qd/domains.hpp"
#include "qd/emitters.hpp"
#include "qd/evalfw.hpp"
#include "qd/methods.hpp"
#include "qd/novelty.hpp"
#include "qd/optimizer.hpp"
#include "qd/stats.hpp"

using namespace qd;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Verdict()>& check)
{
    const auto t0 = Clock::now();
    Verdict v;
    try {
        v = check();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    failures += v.pass ? 0 : 1;
    std::printf("%s %2d %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", id, name.c_str(), v.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Brute-force novelty: sort all distances, average the k smallest.
double brute_novelty(const Vector& q, const std::vector<Vector>& refs, std::size_t k)
{
    std::vector<double> d;
    for (const auto& r : refs) {
        double s = 0;
        for (std::size_t i = 0; i < q.size(); ++i)
            s += (q[i] - r[i]) * (q[i] - r[i]);
        d.push_back(std::sqrt(s));
    }
    std::sort(d.begin(), d.end());
    const std::size_t n = std::min(k, d.size());
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i)
        sum += d[i];
    return sum / static_cast<double>(n);
}

Verdict novelty_oracle()
{
    const auto t0 = Clock::now();
    Rng rng(1);
    std::vector<Vector> pts(500);
    for (auto& p : pts)
        p = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    double worst = 0;
    for (const auto& p : pts)
        worst = std::max(worst, std::abs(knn_novelty(p, pts, 15) - brute_novelty(p, pts, 15)));
    const double t = seconds_since(t0);
    return {worst <= 1e-9 && t < 5.0, fmt("max |error| %.3g over 500 points, %.2f s", worst, t)};
}

Verdict cma_sphere()
{
    const auto t0 = Clock::now();
    int solved = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        CmaEs cma(Vector(6, 0.5), 0.3);
        std::size_t evals = 0;
        double best = INFINITY;
        while (evals < 10000 && best > 1e-8 && !cma.needs_restart()) {
            auto batch = cma.ask(rng);
            std::vector<std::pair<double, std::size_t>> f;
            for (std::size_t i = 0; i < batch.size(); ++i) {
                double s = 0;
                for (double x : batch[i].values())
                    s += x * x;
                f.emplace_back(s, i);
                best = std::min(best, s);
                if (++evals == 10000)
                    break;
            }
            if (f.size() < batch.size())
                break;
            std::sort(f.begin(), f.end());
            std::vector<Genome> ranked;
            for (const auto& [v, i] : f)
                ranked.push_back(batch[i]);
            cma.tell(ranked);
        }
        solved += best <= 1e-8;
    }
    const double t = seconds_since(t0);
    return {solved >= 18 && t < 30.0, fmt("%d/20 seeds reached 1e-8 within 1e4 evaluations, %.2f s", solved, t)};
}

Verdict mae_alpha_zero()
{
    Rng rng(3);
    int agree = 0;
    for (int trial = 0; trial < 100; ++trial) {
        GridArchive archive({{0.0, 1.0}, {0.0, 1.0}}, {10, 10});
        archive.enable_thresholds(-1.0);
        std::vector<Individual> batch(36);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            auto& ind = batch[i];
            ind.id = i;
            ind.genome = Genome(Vector{0.0, 0.0});
            if (rng.bernoulli(0.8))
                ind.evaluation.descriptor = Vector{rng.uniform(), rng.uniform()};
            if (ind.eligible() && rng.bernoulli(0.5)) {
                ind.evaluation.success = true;
                ind.evaluation.fitness = rng.uniform(0.01, 1.0);
            }
        }
        const auto ranked = cma_mae_rank(batch, archive, 0.0, 2);
        agree += ranked.order == fitness_ranking(batch);
    }
    return {agree == 100, fmt("%d/100 batches ranked as by fitness", agree)};
}

std::string archive_text(const GridArchive& a)
{
    std::ostringstream out;
    write_archive(out, a);
    return out.str();
}

Verdict replay_union()
{
    const auto grasp = make_domain("planar-grasp");
    const RunRecord r = run(build_method("NS"), *grasp, 20000, 1);
    std::ostringstream log_out;
    write_evaluation_log(log_out, r.log);
    std::istringstream log_in(log_out.str());
    const auto back = read_evaluation_log(log_in);
    const bool same = archive_text(replay_outcome_archive(grasp->spec(), back)) == archive_text(r.outcome_archive);
    return {same && back.size() == 20000,
            fmt("%zu logged evaluations, replayed archive %s", back.size(), same ? "identical" : "differs")};
}

Verdict micro_ratios()
{
    const int n = 4000;
    long eligible = 0, success = 0;
    for (int i = 0; i < n; ++i) {
        const double x = -1.0 + (i + 0.5) * 2.0 / n;
        for (int j = 0; j < n; ++j) {
            const double y = -1.0 + (j + 0.5) * 2.0 / n;
            const double r = std::hypot(x, y);
            eligible += r <= MicroDomain::kEligibleRadius;
            success += r <= MicroDomain::kSuccessRadius;
        }
    }
    const double total = static_cast<double>(n) * n;
    const double eo = eligible / total, es = success / total;
    const double samples = 1e5;
    const double so = std::sqrt(eo * (1 - eo) / samples), ss = std::sqrt(es * (1 - es) / samples);
    const MicroDomain micro;
    int ok = 0;
    double worst = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto r = difficulty_ratios(micro, 100000, seed);
        const double zo = std::abs(r.outcome() - eo) / so, zs = std::abs(r.success() - es) / ss;
        worst = std::max({worst, zo, zs});
        ok += zo <= 3.0 && zs <= 3.0;
    }
    return {ok == 10, fmt("%d/10 seeds within 3 sigma of eta_o=%.5f eta_s=%.5f (worst %.2f sigma)", ok, eo, es, worst)};
}

Verdict grasp_calibration()
{
    const auto grasp = make_domain("planar-grasp");
    const auto r = difficulty_ratios(*grasp, 100000, 1);
    const bool ok = r.outcome() >= 0.05 && r.outcome() <= 0.6 && r.success() >= 1e-4 && r.success() <= 1e-3;
    return {ok, fmt("eta_o=%.4f eta_s=%.5f", r.outcome(), r.success())};
}

struct Finals {
    std::vector<double> cvg_outcome, cvg_success, eta_outcome, eta_success;
};

Finals finals(const std::string& method, const Domain& domain)
{
    Finals f;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const RunRecord r = run(build_method(method), domain, 20000, seed, {1, 10, false});
        f.cvg_outcome.push_back(r.rows.back().cvg_outcome);
        f.cvg_success.push_back(r.rows.back().cvg_success);
        double eo = 0, es = 0;
        for (const auto& row : r.rows) {
            eo += row.eta_outcome;
            es += row.eta_success;
        }
        f.eta_outcome.push_back(eo / static_cast<double>(r.rows.size()));
        f.eta_success.push_back(es / static_cast<double>(r.rows.size()));
    }
    return f;
}

std::string describe(const std::vector<double>& x)
{
    const auto s = stats::spread(x);
    return fmt("%.4g [%.4g, %.4g]", s.median, s.q1, s.q3);
}

Verdict grasp_ordering()
{
    const auto t0 = Clock::now();
    const auto grasp = make_domain("planar-grasp");
    const Finals scs = finals("ME-scs", *grasp), rnd = finals("ME-rand", *grasp), ns = finals("NS", *grasp);
    const double m_scs = stats::median(scs.cvg_success), m_rnd = stats::median(rnd.cvg_success),
                 m_ns = stats::median(ns.cvg_success);
    const double p = stats::mann_whitney(scs.cvg_success, ns.cvg_success).p;
    const double t = seconds_since(t0);
    const bool ok = m_scs > m_rnd && m_scs > m_ns && p < 0.05 && t < 1800.0;
    return {ok, fmt("median cvg(A_s): ME-scs %.5f, ME-rand %.5f, NS %.5f; p(ME-scs vs NS)=%.3g", m_scs, m_rnd, m_ns,
                    p)};
}

Verdict dense_exploration()
{
    const auto nav = make_domain("dense-nav");
    const Finals ns = finals("NS", *nav), rnd = finals("Random", *nav);
    const double m_ns = stats::median(ns.cvg_outcome), m_rnd = stats::median(rnd.cvg_outcome);
    const double p = stats::mann_whitney(ns.cvg_outcome, rnd.cvg_outcome).p;

    // Reported only: the same comparison on the sparse domain and the ratio distributions.
    const auto grasp = make_domain("planar-grasp");
    std::printf("     planar-grasp, 10 seeds, 20k evaluations (median [q1, q3])\n");
    Finals g_ns, g_rnd;
    for (const char* m : {"Random", "NS", "ME-rand", "ME-scs"}) {
        const Finals f = finals(m, *grasp);
        std::printf("     %-8s cvg(A_o) %s  eta_o %s  eta_s %s\n", m, describe(f.cvg_outcome).c_str(),
                    describe(f.eta_outcome).c_str(), describe(f.eta_success).c_str());
        if (std::string(m) == "NS")
            g_ns = f;
        if (std::string(m) == "Random")
            g_rnd = f;
    }
    std::printf("     planar-grasp NS vs Random on cvg(A_o): p=%.3g\n",
                stats::mann_whitney(g_ns.cvg_outcome, g_rnd.cvg_outcome).p);
    return {m_ns > m_rnd && p < 0.05,
            fmt("dense-nav median cvg(A_o): NS %.4f, Random %.4f; p=%.3g", m_ns, m_rnd, p)};
}

Verdict fitness_contract()
{
    const auto grasp = make_domain("planar-grasp");
    Rng rng(9);
    std::size_t violations = 0, successes = 0;
    for (int i = 0; i < 100000; ++i) {
        const Evaluation e = grasp->evaluate(uniform_random_genome(6, rng));
        const bool ok = e.fitness >= 0.0 && e.fitness <= 1.0 && ((e.fitness > 0.0) == e.success);
        violations += !ok;
        successes += e.success;
    }
    return {violations == 0, fmt("%zu violations over 1e5 evaluations (%zu successes)", violations, successes)};
}

Verdict worker_determinism()
{
    const auto grasp = make_domain("planar-grasp");
    auto csv = [&](std::size_t workers) {
        const RunRecord r = run(build_method("CMA-ME"), *grasp, 20000, 5, {workers, 10, false});
        std::ostringstream out;
        write_metrics_csv(out, r.rows);
        return out.str();
    };
    const bool same = csv(1) == csv(8);
    return {same, same ? "metrics CSV identical for 1 and 8 workers" : "metrics CSV differs"};
}

} // namespace

int main()
{
    report(1, "novelty oracle", novelty_oracle);
    report(2, "CMA-ES sphere", cma_sphere);
    report(3, "CMA-MAE alpha=0 ranking", mae_alpha_zero);
    report(4, "outcome archive replay", replay_union);
    report(5, "micro ratio oracle", micro_ratios);
    report(6, "grasp calibration", grasp_calibration);
    report(7, "grasp ME-scs ordering", grasp_ordering);
    report(8, "dense-nav exploration", dense_exploration);
    report(9, "fitness contract", fitness_contract);
    report(10, "worker determinism", worker_determinism);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
