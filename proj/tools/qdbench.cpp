// qdbench: run methods on domains, run campaigns, estimate difficulty ratios, build reports.
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "qd/domains.hpp"
#include "qd/errors.hpp"
#include "qd/evalfw.hpp"
#include "qd/harness.hpp"
#include "qd/methods.hpp"
#include "qd/optimizer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kUsage = 2;
constexpr int kOutput = 3;
constexpr int kFailure = 1;

int report_error(int code, const std::string& kind, const std::string& message, json extra = json::object())
{
    json err = {{"error", kind}, {"message", message}, {"exit_code", code}};
    err.update(extra);
    std::cerr << err.dump() << '\n';
    return code;
}

std::map<std::string, double> parse_overrides(const std::vector<std::string>& items)
{
    std::map<std::string, double> out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw qd::InvalidConfiguration(item, "override must look like key=value");
        const std::string key = item.substr(0, eq);
        try {
            std::size_t used = 0;
            const std::string text = item.substr(eq + 1);
            out[key] = std::stod(text, &used);
            if (used != text.size())
                throw std::invalid_argument(text);
        } catch (const std::logic_error&) {
            throw qd::InvalidConfiguration(key, "value is not a number");
        }
    }
    return out;
}

json run_json(const qd::RunRecord& r, const fs::path& dir)
{
    const qd::MetricsRow& last = r.rows.back();
    return {{"method", r.method},
            {"domain", r.domain},
            {"seed", r.seed},
            {"evaluations", last.evaluations},
            {"cvg_outcome", last.cvg_outcome},
            {"cvg_success", last.cvg_success},
            {"qd_score", last.qd_score},
            {"top1", last.top_fitness.empty() ? 0.0 : last.top_fitness.front()},
            {"directory", dir.string()}};
}

// Maps library exceptions to exit codes.
template <typename F>
int guarded(F&& body)
{
    try {
        return body();
    } catch (const qd::CampaignError& e) {
        return report_error(kUsage, "invalid_campaign", e.what(), {{"field", e.key()}, {"line", e.line()}});
    } catch (const qd::InvalidConfiguration& e) {
        return report_error(kUsage, "invalid_configuration", e.what(), {{"field", e.key()}});
    } catch (const qd::OutputError& e) {
        return report_error(kOutput, "unwritable_output", e.what());
    } catch (const std::invalid_argument& e) {
        return report_error(kUsage, "invalid_argument", e.what());
    } catch (const std::exception& e) {
        return report_error(kFailure, "failure", e.what());
    }
}

int cmd_run(const std::string& method, const std::string& domain_name, std::size_t budget, std::uint64_t seed,
            const fs::path& out, std::size_t workers, const std::vector<std::string>& sets)
{
    return guarded([&] {
        const auto overrides = parse_overrides(sets);
        const qd::MethodSpec spec = qd::build_method(method, overrides);
        const auto domain = qd::make_domain(domain_name);
        if (budget < spec.params.lambda)
            throw qd::InvalidConfiguration("budget", "must be at least lambda");
        const fs::path dir = qd::run_directory(out, domain_name, method, seed);
        qd::ensure_writable(dir);
        const qd::RunRecord record = qd::run(spec, *domain, budget, seed, {workers});
        qd::write_run(dir, record, overrides);
        std::cout << run_json(record, dir).dump() << '\n';
        return 0;
    });
}

int cmd_batch(const fs::path& campaign_file, std::optional<std::size_t> jobs_flag, double alpha)
{
    return guarded([&] {
        std::ifstream in(campaign_file);
        if (!in)
            throw qd::CampaignError("", 0, "cannot read campaign file " + campaign_file.string());
        std::stringstream text;
        text << in.rdbuf();
        const qd::Campaign c = qd::parse_campaign(text.str());
        qd::ensure_writable(c.output);

        struct Task {
            std::string method, domain;
            std::uint64_t seed;
        };
        std::vector<Task> tasks;
        for (const auto& d : c.domains)
            for (const auto& m : c.methods)
                for (auto s : c.seeds)
                    tasks.push_back({m, d, s});

        std::atomic<std::size_t> next{0};
        std::mutex io;
        std::exception_ptr failure;
        auto worker = [&] {
            for (std::size_t i = next++; i < tasks.size(); i = next++) {
                const Task& t = tasks[i];
                const fs::path dir = qd::run_directory(c.output, t.domain, t.method, t.seed);
                try {
                    if (qd::run_complete(dir)) {
                        std::lock_guard lock(io);
                        std::cout << json{{"skipped", dir.string()}}.dump() << '\n';
                        continue;
                    }
                    const auto domain = qd::make_domain(t.domain);
                    const qd::RunRecord record =
                        qd::run(qd::build_method(t.method, c.overrides), *domain, c.budget, t.seed, {c.workers});
                    qd::write_run(dir, record, c.overrides);
                    std::lock_guard lock(io);
                    std::cout << run_json(record, dir).dump() << '\n';
                } catch (...) {
                    std::lock_guard lock(io);
                    if (!failure)
                        failure = std::current_exception();
                    next = tasks.size();
                }
            }
        };
        const std::size_t jobs = std::max<std::size_t>(1, std::min(jobs_flag.value_or(c.jobs), tasks.size()));
        {
            std::vector<std::jthread> pool;
            for (std::size_t j = 1; j < jobs; ++j)
                pool.emplace_back(worker);
            worker();
        }
        if (failure)
            std::rethrow_exception(failure);

        const fs::path report = c.output / "report";
        qd::write_report(report, qd::collect_runs({c.output}), alpha);
        std::cout << json{{"runs", tasks.size()}, {"report", report.string()}}.dump() << '\n';
        return 0;
    });
}

int cmd_ratios(const std::string& domain_name, long long samples, std::uint64_t seed, std::size_t workers,
               const std::optional<fs::path>& out)
{
    return guarded([&] {
        if (samples <= 0)
            throw std::invalid_argument("samples must be positive");
        const auto domain = qd::make_domain(domain_name);
        const auto r = qd::difficulty_ratios(*domain, static_cast<std::size_t>(samples), seed, workers);
        const qd::RatioEstimate o = qd::binomial_interval(r.eligible, r.samples);
        const qd::RatioEstimate s = qd::binomial_interval(r.successes, r.samples);
        const json result = {{"format", "qd.ratios"},
                             {"format_version", 1},
                             {"domain", domain_name},
                             {"samples", r.samples},
                             {"seed", seed},
                             {"eta_outcome", {{"value", o.value}, {"ci95", {o.low, o.high}}}},
                             {"eta_success", {{"value", s.value}, {"ci95", {s.low, s.high}}}}};
        std::printf("%-12s %-12s %-26s\n", "ratio", "value", "95% interval");
        std::printf("%-12s %-12.6g [%.6g, %.6g]\n", "eta_o", o.value, o.low, o.high);
        std::printf("%-12s %-12.6g [%.6g, %.6g]\n", "eta_s", s.value, s.low, s.high);
        const fs::path dir = out.value_or(qd::default_output_root() / "ratios" / domain_name);
        qd::ensure_writable(dir);
        const fs::path file = dir / ("ratios-seed-" + std::to_string(seed) + ".json");
        std::ofstream f(file);
        if (!(f << result.dump(2) << '\n'))
            throw qd::OutputError("cannot write " + file.string());
        return 0;
    });
}

int cmd_report(const std::vector<std::string>& dirs, double alpha, const std::optional<fs::path>& out)
{
    return guarded([&] {
        std::vector<fs::path> roots(dirs.begin(), dirs.end());
        if (roots.empty())
            roots.push_back(qd::default_output_root());
        const auto runs = qd::collect_runs(roots);
        if (runs.empty())
            throw std::invalid_argument("no complete runs found");
        const fs::path dir = out.value_or(roots.front() / "report");
        qd::write_report(dir, runs, alpha);
        for (const auto& t : qd::pairwise_tests(runs, alpha)) {
            if (!t.notice.empty())
                std::cerr << json{{"notice", t.notice}, {"domain", t.domain}, {"metric", t.metric},
                                  {"method_a", t.method_a}, {"method_b", t.method_b}}
                                 .dump()
                          << '\n';
        }
        std::cout << json{{"runs", runs.size()}, {"report", dir.string()}}.dump() << '\n';
        return 0;
    });
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Quality-diversity benchmark harness"};
    app.require_subcommand(1);

    std::string method, domain;
    std::size_t budget = 20000, workers = 1;
    std::uint64_t seed = 1;
    std::string out;
    std::vector<std::string> sets;
    auto* run = app.add_subcommand("run", "Run one method on one domain");
    run->add_option("--method", method, "Method name")->required();
    run->add_option("--domain", domain, "Domain name")->required();
    run->add_option("--budget", budget, "Evaluation budget")->capture_default_str();
    run->add_option("--seed", seed, "Random seed")->capture_default_str();
    run->add_option("--out", out, "Output root (default $QDBENCH_OUT or ./runs)");
    run->add_option("--workers", workers, "Evaluation threads")->capture_default_str();
    run->add_option("--set", sets, "Hyperparameter override key=value (repeatable)");

    std::string campaign;
    std::optional<std::size_t> jobs;
    double alpha = 0.05;
    auto* batch = app.add_subcommand("batch", "Run a campaign file and report on it");
    batch->add_option("campaign", campaign, "Campaign JSON file")->required();
    batch->add_option("--jobs", jobs, "Concurrent runs (overrides the campaign)");
    batch->add_option("--alpha", alpha, "Significance level")->capture_default_str();

    long long samples = 100000;
    std::string ratios_out;
    auto* ratios = app.add_subcommand("ratios", "Estimate outcome and success ratios from uniform samples");
    ratios->add_option("--domain", domain, "Domain name")->required();
    ratios->add_option("--samples", samples, "Number of uniform genomes")->capture_default_str();
    ratios->add_option("--seed", seed, "Random seed")->capture_default_str();
    ratios->add_option("--workers", workers, "Evaluation threads")->capture_default_str();
    ratios->add_option("--out", ratios_out, "Output directory");

    std::vector<std::string> dirs;
    std::string report_out;
    auto* report = app.add_subcommand("report", "Aggregate run directories");
    report->add_option("dirs", dirs, "Run directories or roots (default $QDBENCH_OUT or ./runs)");
    report->add_option("--alpha", alpha, "Significance level")->capture_default_str();
    report->add_option("--out", report_out, "Report directory (default <first root>/report)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error(kUsage, "usage", e.what());
    }

    auto optional_path = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<fs::path>(s); };
    if (*run)
        return cmd_run(method, domain, budget, seed, out.empty() ? qd::default_output_root() : fs::path(out), workers,
                       sets);
    if (*batch)
        return cmd_batch(campaign, jobs, alpha);
    if (*ratios)
        return cmd_ratios(domain, samples, seed, workers, optional_path(ratios_out));
    return cmd_report(dirs, alpha, optional_path(report_out));
}
