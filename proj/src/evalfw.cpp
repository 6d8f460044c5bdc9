#include "qd/evalfw.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json_codec.hpp"
#include "qd/errors.hpp"
#include "qd/evaluator.hpp"

namespace qd {

namespace {

constexpr const char* kMetricsHeader = "# qd.metrics format_version=1";
constexpr const char* kMetricsColumns =
    "generation,evaluations,cvg_outcome,cvg_success,qd_score,eta_outcome,eta_success,top_fitness";
constexpr const char* kLogFormat = "qd.evaluation_log";
constexpr int kLogFormatVersion = 1;

double parse_double(const std::string& s)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw InvalidConfiguration("malformed number '" + s + "'");
    return v;
}

std::size_t parse_size(const std::string& s)
{
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw InvalidConfiguration("malformed integer '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(s);
    while (std::getline(in, field, sep))
        out.push_back(field);
    if (!s.empty() && s.back() == sep)
        out.emplace_back();
    return out;
}

} // namespace

std::string format_double(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

double coverage(const GridArchive& archive, bool success_only)
{
    std::size_t filled = 0;
    for (const Elite* e : archive.elites())
        if (!success_only || e->fitness() > 0.0)
            ++filled;
    return static_cast<double>(filled) / static_cast<double>(archive.cell_count());
}

double qd_score(const GridArchive& archive)
{
    double score = 0.0;
    for (const Elite* e : archive.elites())
        if (e->fitness() > 0.0)
            score += e->fitness();
    return score;
}

std::vector<double> top_n_fitness(std::span<const Individual> log, std::size_t n)
{
    std::vector<double> f;
    for (const auto& ind : log)
        if (ind.success())
            f.push_back(ind.fitness());
    const std::size_t keep = std::min(n, f.size());
    std::partial_sort(f.begin(), f.begin() + static_cast<std::ptrdiff_t>(keep), f.end(), std::greater<>());
    f.resize(keep);
    return f;
}

OutcomeRecorder::OutcomeRecorder(const DomainSpec& domain, std::size_t window, std::size_t top_n, bool keep_log)
    : archive_(domain.descriptor_bounds, domain.bins), window_(std::max<std::size_t>(window, 1)), top_n_(top_n),
      keep_log_(keep_log)
{
}

void OutcomeRecorder::record(const Individual& ind)
{
    if (last_id_ && ind.id <= *last_id_)
        throw InvalidState("evaluations must be recorded in increasing id order");
    last_id_ = ind.id;

    ++evaluations_;
    ++window_count_;
    if (ind.eligible()) {
        ++eligible_;
        ++window_eligible_;
        archive_.insert(ind);
    }
    if (ind.success()) {
        ++successes_;
        ++window_successes_;
        const auto pos = std::upper_bound(top_.begin(), top_.end(), ind.fitness(), std::greater<>());
        top_.insert(pos, ind.fitness());
        if (top_.size() > top_n_)
            top_.pop_back();
    }
    if (keep_log_)
        log_.push_back(ind);
    if (window_count_ == window_)
        emit_row();
}

void OutcomeRecorder::finish()
{
    if (window_count_ > 0)
        emit_row();
}

void OutcomeRecorder::emit_row()
{
    MetricsRow row;
    row.generation = rows_.size() + 1;
    row.evaluations = evaluations_;
    row.cvg_outcome = coverage(archive_, false);
    row.cvg_success = coverage(archive_, true);
    row.qd_score = qd_score(archive_);
    row.top_fitness = top_;
    row.eta_outcome = static_cast<double>(window_eligible_) / static_cast<double>(window_count_);
    row.eta_success = static_cast<double>(window_successes_) / static_cast<double>(window_count_);
    rows_.push_back(std::move(row));
    window_count_ = window_eligible_ = window_successes_ = 0;
}

DifficultyRatios difficulty_ratios(const Domain& domain, std::size_t samples, std::uint64_t seed, std::size_t workers)
{
    if (samples == 0)
        throw std::invalid_argument("difficulty ratios need at least one sample");
    Rng rng(seed);
    const Evaluator evaluator(domain, workers);
    DifficultyRatios r;
    r.samples = samples;
    constexpr std::size_t kChunk = 4096;
    std::vector<Genome> batch;
    for (std::size_t done = 0; done < samples;) {
        const std::size_t n = std::min(kChunk, samples - done);
        batch.clear();
        for (std::size_t i = 0; i < n; ++i)
            batch.push_back(uniform_random_genome(domain.spec().genome_length, rng));
        for (const auto& e : evaluator.evaluate(batch)) {
            r.eligible += e.eligible();
            r.successes += e.success;
        }
        done += n;
    }
    return r;
}

GridArchive replay_outcome_archive(const DomainSpec& domain, std::span<const Individual> log)
{
    std::vector<const Individual*> ordered;
    ordered.reserve(log.size());
    for (const auto& ind : log)
        ordered.push_back(&ind);
    std::sort(ordered.begin(), ordered.end(), [](const Individual* a, const Individual* b) { return a->id < b->id; });
    GridArchive archive(domain.descriptor_bounds, domain.bins);
    for (const Individual* ind : ordered)
        if (ind->eligible())
            archive.insert(*ind);
    return archive;
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows)
{
    out << kMetricsHeader << '\n' << kMetricsColumns << '\n';
    for (const auto& r : rows) {
        out << r.generation << ',' << r.evaluations << ',' << format_double(r.cvg_outcome) << ','
            << format_double(r.cvg_success) << ',' << format_double(r.qd_score) << ',' << format_double(r.eta_outcome)
            << ',' << format_double(r.eta_success) << ',';
        for (std::size_t i = 0; i < r.top_fitness.size(); ++i)
            out << (i ? ";" : "") << format_double(r.top_fitness[i]);
        out << '\n';
    }
}

std::vector<MetricsRow> read_metrics_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != kMetricsHeader)
        throw InvalidConfiguration("metrics", "missing or unsupported format header");
    if (!std::getline(in, line) || line != kMetricsColumns)
        throw InvalidConfiguration("metrics", "unexpected column header");
    std::vector<MetricsRow> rows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto f = split(line, ',');
        if (f.size() != 8)
            throw InvalidConfiguration("metrics", "row " + std::to_string(rows.size() + 1) + " has " +
                                                       std::to_string(f.size()) + " fields");
        MetricsRow r;
        r.generation = parse_size(f[0]);
        r.evaluations = parse_size(f[1]);
        r.cvg_outcome = parse_double(f[2]);
        r.cvg_success = parse_double(f[3]);
        r.qd_score = parse_double(f[4]);
        r.eta_outcome = parse_double(f[5]);
        r.eta_success = parse_double(f[6]);
        if (!f[7].empty())
            for (const auto& v : split(f[7], ';'))
                r.top_fitness.push_back(parse_double(v));
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_evaluation_log(std::ostream& out, std::span<const Individual> log)
{
    detail::json header;
    header["format"] = kLogFormat;
    header["format_version"] = kLogFormatVersion;
    out << header.dump() << '\n';
    for (const auto& ind : log)
        out << detail::individual_to_json(ind).dump() << '\n';
}

std::vector<Individual> read_evaluation_log(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
        throw InvalidConfiguration("evaluation log is empty");
    const auto header = detail::json::parse(line);
    if (header.value("format", "") != kLogFormat || header.value("format_version", 0) != kLogFormatVersion)
        throw InvalidConfiguration("format", "not a supported evaluation log");
    std::vector<Individual> log;
    while (std::getline(in, line))
        if (!line.empty())
            log.push_back(detail::individual_from_json(detail::json::parse(line)));
    return log;
}

} // namespace qd
