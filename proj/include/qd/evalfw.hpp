#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qd/core.hpp"
#include "qd/domains.hpp"
#include "qd/grid_archive.hpp"

namespace qd {

/// Receives every evaluation a method produces, in increasing id order. Write-only from the
/// method's point of view.
class EvaluationSink {
public:
    virtual ~EvaluationSink() = default;
    virtual void record(const Individual& ind) = 0;
};

/// Fraction of occupied cells; with `success_only`, only cells whose elite has fitness > 0.
double coverage(const GridArchive& archive, bool success_only);

/// Sum of elite fitnesses over cells with positive fitness.
double qd_score(const GridArchive& archive);

/// The `n` highest fitnesses among successful evaluations, descending, duplicates kept.
std::vector<double> top_n_fitness(std::span<const Individual> log, std::size_t n);

struct MetricsRow {
    std::size_t generation = 0;
    std::size_t evaluations = 0;
    double cvg_outcome = 0.0;
    double cvg_success = 0.0;
    double qd_score = 0.0;
    std::vector<double> top_fitness;
    /// Outcome and success ratios over the evaluations of this row's window.
    double eta_outcome = 0.0;
    double eta_success = 0.0;

    bool operator==(const MetricsRow&) const = default;
};

/// External outcome archive fed by every evaluation of a run, plus per-window metrics.
class OutcomeRecorder final : public EvaluationSink {
public:
    /// `window` evaluations per metrics row; `top_n` fitnesses tracked per row.
    OutcomeRecorder(const DomainSpec& domain, std::size_t window, std::size_t top_n = 10, bool keep_log = true);

    void record(const Individual& ind) override;
    /// Emits a row for a trailing partial window, if any.
    void finish();

    const GridArchive& archive() const noexcept { return archive_; }
    const std::vector<MetricsRow>& rows() const noexcept { return rows_; }
    const std::vector<Individual>& log() const noexcept { return log_; }
    std::size_t evaluations() const noexcept { return evaluations_; }
    std::size_t eligible() const noexcept { return eligible_; }
    std::size_t successes() const noexcept { return successes_; }

private:
    void emit_row();

    GridArchive archive_;
    std::size_t window_;
    std::size_t top_n_;
    bool keep_log_;
    std::vector<Individual> log_;
    std::vector<double> top_;  // descending
    std::vector<MetricsRow> rows_;
    std::size_t evaluations_ = 0, eligible_ = 0, successes_ = 0;
    std::size_t window_count_ = 0, window_eligible_ = 0, window_successes_ = 0;
    std::optional<IndividualId> last_id_;
};

struct RunRecord {
    static constexpr int kFormatVersion = 1;

    explicit RunRecord(GridArchive outcome) : outcome_archive(std::move(outcome)) {}

    std::string method;
    std::string domain;
    std::uint64_t seed = 0;
    std::size_t budget = 0;
    std::vector<MetricsRow> rows;
    GridArchive outcome_archive;
    std::vector<Individual> log;
    /// The method's own structured container, when it has one.
    std::optional<GridArchive> method_archive;
};

struct DifficultyRatios {
    std::size_t samples = 0;
    std::size_t eligible = 0;
    std::size_t successes = 0;

    double outcome() const noexcept { return static_cast<double>(eligible) / static_cast<double>(samples); }
    double success() const noexcept { return static_cast<double>(successes) / static_cast<double>(samples); }
};

/// Evaluates `samples` uniform genomes. Throws std::invalid_argument when samples == 0.
DifficultyRatios difficulty_ratios(const Domain& domain, std::size_t samples, std::uint64_t seed,
                                   std::size_t workers = 1);

/// Rebuilds the outcome archive from an evaluation log, inserting in ascending id order.
GridArchive replay_outcome_archive(const DomainSpec& domain, std::span<const Individual> log);

/// CSV with a `# qd.metrics format_version=1` first line and a fixed header.
void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows);
std::vector<MetricsRow> read_metrics_csv(std::istream& in);

/// One JSON record per line: id, parent, generation, genome, descriptor (or null), fitness, success.
void write_evaluation_log(std::ostream& out, std::span<const Individual> log);
std::vector<Individual> read_evaluation_log(std::istream& in);

/// Formats a double so that parsing it back yields the same value.
std::string format_double(double v);

} // namespace qd
