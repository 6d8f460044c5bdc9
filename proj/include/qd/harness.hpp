#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qd/errors.hpp"
#include "qd/evalfw.hpp"

namespace qd {

/// Environment variable naming the default output root.
inline constexpr const char* kOutputRootVariable = "QDBENCH_OUT";

/// Value of kOutputRootVariable, or "runs" when unset or empty.
std::filesystem::path default_output_root();

/// The output directory cannot be created or written.
class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A campaign file problem, with the 1-based line where it was detected (0 when unknown).
class CampaignError : public InvalidConfiguration {
public:
    CampaignError(std::string field, std::size_t line, const std::string& what)
        : InvalidConfiguration(std::move(field), what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct Campaign {
    static constexpr int kFormatVersion = 1;

    std::vector<std::string> methods;
    std::vector<std::string> domains;
    std::size_t budget = 20000;
    std::vector<std::uint64_t> seeds;
    std::filesystem::path output;
    std::map<std::string, double> overrides;
    std::size_t workers = 1;
    std::size_t jobs = 1;
};

/// Parses and validates a JSON campaign. Unknown keys, unknown methods or domains, duplicate
/// seeds and budgets below lambda are rejected with a CampaignError.
Campaign parse_campaign(const std::string& text);

/// <root>/<domain>/<method>/seed-<seed>
std::filesystem::path run_directory(const std::filesystem::path& root, const std::string& domain,
                                    const std::string& method, std::uint64_t seed);

/// Creates `dir` and checks a file can be written in it. Throws OutputError.
void ensure_writable(const std::filesystem::path& dir);

/// Writes metrics.csv, evaluations.jsonl, outcome_archive.jsonl, method_archive.jsonl (when the
/// method has a grid container) and finally run.json, which marks the run complete.
void write_run(const std::filesystem::path& dir, const RunRecord& record,
               const std::map<std::string, double>& overrides = {});

/// True when run.json exists and reports a complete run.
bool run_complete(const std::filesystem::path& dir);

/// What a report needs from one persisted run.
struct RunSummary {
    std::string method;
    std::string domain;
    std::uint64_t seed = 0;
    std::size_t budget = 0;
    std::vector<MetricsRow> rows;
};

RunSummary read_run(const std::filesystem::path& dir);

/// Complete run directories found at or below each root, sorted by (domain, method, seed).
std::vector<RunSummary> collect_runs(const std::vector<std::filesystem::path>& roots);

struct PairwiseTest {
    std::string domain;
    std::string metric;
    std::string method_a;
    std::string method_b;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    double u = 0.0;
    double p = 1.0;
    bool significant = false;
    /// Set when the test was skipped.
    std::string notice;
};

/// Two-sided Mann-Whitney tests between every method pair of a domain on final cvg(A_s) and
/// final top-1 fitness. Pairs with fewer than 2 runs on either side are skipped with a notice.
std::vector<PairwiseTest> pairwise_tests(const std::vector<RunSummary>& runs, double alpha);

/// Writes summary.csv (median and quartiles per generation), final.csv, significance.csv,
/// top_n.csv (per run and pooled) and eta.csv into `dir`. Output depends only on `runs`.
void write_report(const std::filesystem::path& dir, const std::vector<RunSummary>& runs, double alpha);

struct RatioEstimate {
    double value = 0.0;
    double low = 0.0;
    double high = 0.0;
};

/// Wilson score interval at 95%.
RatioEstimate binomial_interval(std::size_t hits, std::size_t samples);

} // namespace qd
