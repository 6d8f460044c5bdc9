#include "qd/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qd/domains.hpp"
#include "qd/methods.hpp"
#include "qd/stats.hpp"

namespace qd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kRunFormat = "qd.run";
constexpr int kRunFormatVersion = 1;
constexpr const char* kReportHeader = "# qd.report format_version=1";

std::size_t line_at(const std::string& text, std::size_t offset)
{
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line of the first occurrence of a quoted key, 0 when absent.
std::size_t line_of_key(const std::string& text, const std::string& key)
{
    const auto pos = text.find('"' + key + '"');
    return pos == std::string::npos ? 0 : line_at(text, pos);
}

std::ofstream open_output(const fs::path& file)
{
    std::ofstream out(file, std::ios::binary);
    if (!out)
        throw OutputError("cannot write " + file.string());
    return out;
}

void close_output(std::ofstream& out, const fs::path& file)
{
    out.close();
    if (!out)
        throw OutputError("failed writing " + file.string());
}

double top1(const MetricsRow& row)
{
    return row.top_fitness.empty() ? 0.0 : row.top_fitness.front();
}

struct Metric {
    const char* name;
    double (*get)(const MetricsRow&);
};

const std::vector<Metric>& report_metrics()
{
    static const std::vector<Metric> m = {
        {"cvg_outcome", [](const MetricsRow& r) { return r.cvg_outcome; }},
        {"cvg_success", [](const MetricsRow& r) { return r.cvg_success; }},
        {"qd_score", [](const MetricsRow& r) { return r.qd_score; }},
        {"eta_outcome", [](const MetricsRow& r) { return r.eta_outcome; }},
        {"eta_success", [](const MetricsRow& r) { return r.eta_success; }},
        {"top1", top1},
    };
    return m;
}

using Group = std::vector<const RunSummary*>;

// Runs grouped by (domain, method), in the sorted order of the input.
std::vector<std::pair<std::pair<std::string, std::string>, Group>> group_runs(const std::vector<RunSummary>& runs)
{
    std::vector<std::pair<std::pair<std::string, std::string>, Group>> groups;
    for (const auto& r : runs) {
        const auto key = std::make_pair(r.domain, r.method);
        auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == key; });
        if (it == groups.end()) {
            groups.push_back({key, {}});
            it = groups.end() - 1;
        }
        it->second.push_back(&r);
    }
    return groups;
}

} // namespace

fs::path default_output_root()
{
    const char* env = std::getenv(kOutputRootVariable);
    return env && *env ? fs::path(env) : fs::path("runs");
}

Campaign parse_campaign(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw CampaignError("", line_at(text, e.byte == 0 ? 0 : e.byte - 1), e.what());
    }
    auto fail = [&](const std::string& field, const std::string& what) -> CampaignError {
        return CampaignError(field, line_of_key(text, field), what);
    };
    if (!doc.is_object())
        throw CampaignError("", 1, "campaign must be a JSON object");

    static const std::set<std::string> known = {"format_version", "methods", "domains", "budget", "seeds",
                                                "output",         "overrides", "workers", "jobs"};
    for (const auto& [key, value] : doc.items())
        if (!known.count(key))
            throw fail(key, "unknown field");
    for (const char* required : {"methods", "domains", "seeds"})
        if (!doc.contains(required))
            throw CampaignError(required, 0, "missing required field");

    if (doc.contains("format_version")) {
        const json& v = doc["format_version"];
        if (!v.is_number_integer() || v.get<int>() != Campaign::kFormatVersion)
            throw fail("format_version", "unsupported format version");
    }

    auto strings = [&](const char* field) {
        const json& v = doc[field];
        if (!v.is_array() || v.empty())
            throw fail(field, "must be a non-empty array of strings");
        std::vector<std::string> out;
        for (const auto& s : v) {
            if (!s.is_string())
                throw fail(field, "must be a non-empty array of strings");
            out.push_back(s.get<std::string>());
        }
        return out;
    };
    auto count = [&](const char* field, std::size_t fallback) {
        if (!doc.contains(field))
            return fallback;
        const json& v = doc[field];
        if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0)
            throw fail(field, "must be a positive integer");
        return static_cast<std::size_t>(v.get<std::uint64_t>());
    };

    Campaign c;
    c.methods = strings("methods");
    c.domains = strings("domains");
    const auto& names = method_names();
    for (const auto& m : c.methods)
        if (std::find(names.begin(), names.end(), m) == names.end())
            throw fail("methods", "unknown method '" + m + "'");
    const auto domains = domain_names();
    for (const auto& d : c.domains)
        if (std::find(domains.begin(), domains.end(), d) == domains.end())
            throw fail("domains", "unknown domain '" + d + "'");

    const json& seeds = doc["seeds"];
    if (!seeds.is_array() || seeds.empty())
        throw fail("seeds", "must be a non-empty array of non-negative integers");
    std::set<std::uint64_t> seen;
    for (const auto& s : seeds) {
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
            throw fail("seeds", "must be a non-empty array of non-negative integers");
        const auto v = s.get<std::uint64_t>();
        if (!seen.insert(v).second)
            throw fail("seeds", "duplicate seed " + std::to_string(v));
        c.seeds.push_back(v);
    }

    c.budget = count("budget", c.budget);
    c.workers = count("workers", c.workers);
    c.jobs = count("jobs", c.jobs);

    if (doc.contains("output")) {
        if (!doc["output"].is_string() || doc["output"].get<std::string>().empty())
            throw fail("output", "must be a non-empty string");
        c.output = doc["output"].get<std::string>();
    } else {
        c.output = default_output_root();
    }

    if (doc.contains("overrides")) {
        const json& o = doc["overrides"];
        if (!o.is_object())
            throw fail("overrides", "must be an object of numbers");
        for (const auto& [key, value] : o.items()) {
            if (!value.is_number())
                throw fail(key, "override must be a number");
            c.overrides[key] = value.get<double>();
        }
    }
    for (const auto& m : c.methods) {
        MethodSpec spec;
        try {
            spec = build_method(m, c.overrides);
        } catch (const InvalidConfiguration& e) {
            throw fail(e.key(), e.what());
        }
        if (c.budget < spec.params.lambda)
            throw fail("budget", "must be at least lambda (" + std::to_string(spec.params.lambda) + ")");
    }
    return c;
}

fs::path run_directory(const fs::path& root, const std::string& domain, const std::string& method, std::uint64_t seed)
{
    return root / domain / method / ("seed-" + std::to_string(seed));
}

void ensure_writable(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw OutputError("cannot create directory " + dir.string());
    const fs::path probe = dir / ".write-probe";
    {
        std::ofstream out(probe);
        if (!out || !(out << "ok") || !(out.flush()))
            throw OutputError("directory is not writable: " + dir.string());
    }
    fs::remove(probe, ec);
}

void write_run(const fs::path& dir, const RunRecord& record, const std::map<std::string, double>& overrides)
{
    ensure_writable(dir);
    std::error_code ec;
    fs::remove(dir / "run.json", ec);

    auto emit = [&](const char* name, auto&& body) {
        const fs::path file = dir / name;
        std::ofstream out = open_output(file);
        body(out);
        close_output(out, file);
    };
    emit("metrics.csv", [&](std::ostream& o) { write_metrics_csv(o, record.rows); });
    emit("evaluations.jsonl", [&](std::ostream& o) { write_evaluation_log(o, record.log); });
    emit("outcome_archive.jsonl", [&](std::ostream& o) { write_archive(o, record.outcome_archive); });
    if (record.method_archive)
        emit("method_archive.jsonl", [&](std::ostream& o) { write_archive(o, *record.method_archive); });
    else
        fs::remove(dir / "method_archive.jsonl", ec);

    json meta = {{"format", kRunFormat},
                 {"format_version", kRunFormatVersion},
                 {"status", "complete"},
                 {"method", record.method},
                 {"domain", record.domain},
                 {"seed", record.seed},
                 {"budget", record.budget},
                 {"evaluations", record.rows.empty() ? 0 : record.rows.back().evaluations},
                 {"overrides", overrides}};
    emit("run.json", [&](std::ostream& o) { o << meta.dump(2) << '\n'; });
}

bool run_complete(const fs::path& dir)
{
    std::ifstream in(dir / "run.json");
    if (!in)
        return false;
    try {
        const json meta = json::parse(in);
        return meta.value("format", "") == kRunFormat && meta.value("status", "") == "complete" &&
               fs::exists(dir / "metrics.csv");
    } catch (const json::exception&) {
        return false;
    }
}

RunSummary read_run(const fs::path& dir)
{
    std::ifstream in(dir / "run.json");
    if (!in)
        throw InvalidConfiguration("missing run.json in " + dir.string());
    json meta;
    try {
        meta = json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidConfiguration("malformed run.json in " + dir.string() + ": " + e.what());
    }
    if (meta.value("format_version", 0) != kRunFormatVersion)
        throw InvalidConfiguration("unsupported run format in " + dir.string());

    RunSummary s;
    s.method = meta.at("method").get<std::string>();
    s.domain = meta.at("domain").get<std::string>();
    s.seed = meta.at("seed").get<std::uint64_t>();
    s.budget = meta.at("budget").get<std::size_t>();
    std::ifstream csv(dir / "metrics.csv");
    if (!csv)
        throw InvalidConfiguration("missing metrics.csv in " + dir.string());
    s.rows = read_metrics_csv(csv);
    return s;
}

std::vector<RunSummary> collect_runs(const std::vector<fs::path>& roots)
{
    std::set<fs::path> dirs;
    for (const auto& root : roots) {
        if (run_complete(root)) {
            dirs.insert(fs::weakly_canonical(root));
            continue;
        }
        if (!fs::is_directory(root))
            throw InvalidConfiguration("not a directory: " + root.string());
        for (const auto& entry : fs::recursive_directory_iterator(root))
            if (entry.is_directory() && run_complete(entry.path()))
                dirs.insert(fs::weakly_canonical(entry.path()));
    }
    std::vector<RunSummary> runs;
    for (const auto& d : dirs)
        runs.push_back(read_run(d));
    std::sort(runs.begin(), runs.end(), [](const RunSummary& a, const RunSummary& b) {
        return std::tie(a.domain, a.method, a.seed) < std::tie(b.domain, b.method, b.seed);
    });
    return runs;
}

std::vector<PairwiseTest> pairwise_tests(const std::vector<RunSummary>& runs, double alpha)
{
    const auto groups = group_runs(runs);
    const std::vector<Metric> metrics = {report_metrics()[1], report_metrics()[5]};
    std::vector<PairwiseTest> tests;
    for (std::size_t a = 0; a < groups.size(); ++a) {
        for (std::size_t b = a + 1; b < groups.size(); ++b) {
            if (groups[a].first.first != groups[b].first.first)
                continue;
            for (const auto& metric : metrics) {
                PairwiseTest t;
                t.domain = groups[a].first.first;
                t.metric = metric.name;
                t.method_a = groups[a].first.second;
                t.method_b = groups[b].first.second;
                std::vector<double> xa, xb;
                for (const RunSummary* r : groups[a].second)
                    if (!r->rows.empty())
                        xa.push_back(metric.get(r->rows.back()));
                for (const RunSummary* r : groups[b].second)
                    if (!r->rows.empty())
                        xb.push_back(metric.get(r->rows.back()));
                t.n_a = xa.size();
                t.n_b = xb.size();
                if (t.n_a < 2 || t.n_b < 2) {
                    t.notice = "skipped: fewer than 2 runs";
                } else {
                    const stats::MannWhitney mw = stats::mann_whitney(xa, xb);
                    t.u = mw.u;
                    t.p = mw.p;
                    t.significant = mw.p < alpha;
                }
                tests.push_back(std::move(t));
            }
        }
    }
    return tests;
}

void write_report(const fs::path& dir, const std::vector<RunSummary>& runs, double alpha)
{
    ensure_writable(dir);
    const auto groups = group_runs(runs);
    auto f = [](double v) { return format_double(v); };

    {
        const fs::path file = dir / "summary.csv";
        std::ofstream out = open_output(file);
        out << kReportHeader << '\n' << "domain,method,generation,evaluations,metric,runs,median,q1,q3\n";
        for (const auto& [key, group] : groups) {
            std::size_t length = 0;
            for (const RunSummary* r : group)
                length = std::max(length, r->rows.size());
            for (std::size_t g = 0; g < length; ++g) {
                std::vector<const MetricsRow*> rows;
                for (const RunSummary* r : group)
                    if (g < r->rows.size())
                        rows.push_back(&r->rows[g]);
                for (const auto& metric : report_metrics()) {
                    std::vector<double> values;
                    for (const MetricsRow* row : rows)
                        values.push_back(metric.get(*row));
                    const stats::Spread s = stats::spread(values);
                    out << key.first << ',' << key.second << ',' << (g + 1) << ',' << rows.front()->evaluations << ','
                        << metric.name << ',' << values.size() << ',' << f(s.median) << ',' << f(s.q1) << ','
                        << f(s.q3) << '\n';
                }
            }
        }
        close_output(out, file);
    }
    {
        const fs::path file = dir / "final.csv";
        std::ofstream out = open_output(file);
        out << kReportHeader << '\n' << "domain,method,seed,evaluations,cvg_outcome,cvg_success,qd_score,top1\n";
        for (const auto& r : runs) {
            if (r.rows.empty())
                continue;
            const MetricsRow& last = r.rows.back();
            out << r.domain << ',' << r.method << ',' << r.seed << ',' << last.evaluations << ','
                << f(last.cvg_outcome) << ',' << f(last.cvg_success) << ',' << f(last.qd_score) << ','
                << f(top1(last)) << '\n';
        }
        close_output(out, file);
    }
    {
        const fs::path file = dir / "significance.csv";
        std::ofstream out = open_output(file);
        out << kReportHeader << '\n'
            << "domain,metric,method_a,method_b,n_a,n_b,u,p,alpha,significant,notice\n";
        for (const auto& t : pairwise_tests(runs, alpha))
            out << t.domain << ',' << t.metric << ',' << t.method_a << ',' << t.method_b << ',' << t.n_a << ','
                << t.n_b << ',' << f(t.u) << ',' << f(t.p) << ',' << f(alpha) << ',' << (t.significant ? 1 : 0)
                << ',' << t.notice << '\n';
        close_output(out, file);
    }
    {
        const fs::path file = dir / "top_n.csv";
        std::ofstream out = open_output(file);
        out << kReportHeader << '\n' << "domain,method,scope,rank,fitness\n";
        for (const auto& [key, group] : groups) {
            std::vector<double> pooled;
            std::size_t n = 0;
            for (const RunSummary* r : group) {
                if (r->rows.empty())
                    continue;
                const auto& top = r->rows.back().top_fitness;
                n = std::max(n, top.size());
                for (std::size_t i = 0; i < top.size(); ++i)
                    out << key.first << ',' << key.second << ",seed-" << r->seed << ',' << (i + 1) << ','
                        << f(top[i]) << '\n';
                pooled.insert(pooled.end(), top.begin(), top.end());
            }
            std::sort(pooled.begin(), pooled.end(), std::greater<>());
            pooled.resize(std::min(n, pooled.size()));
            for (std::size_t i = 0; i < pooled.size(); ++i)
                out << key.first << ',' << key.second << ",pooled," << (i + 1) << ',' << f(pooled[i]) << '\n';
        }
        close_output(out, file);
    }
    {
        const fs::path file = dir / "eta.csv";
        std::ofstream out = open_output(file);
        out << kReportHeader << '\n' << "domain,method,metric,windows,median,q1,q3\n";
        for (const auto& [key, group] : groups) {
            for (const auto& metric : {report_metrics()[3], report_metrics()[4]}) {
                std::vector<double> values;
                for (const RunSummary* r : group)
                    for (const auto& row : r->rows)
                        values.push_back(metric.get(row));
                if (values.empty())
                    continue;
                const stats::Spread s = stats::spread(values);
                out << key.first << ',' << key.second << ',' << metric.name << ',' << values.size() << ','
                    << f(s.median) << ',' << f(s.q1) << ',' << f(s.q3) << '\n';
            }
        }
        close_output(out, file);
    }
}

RatioEstimate binomial_interval(std::size_t hits, std::size_t samples)
{
    if (samples == 0)
        throw std::invalid_argument("binomial interval needs at least one sample");
    const double n = static_cast<double>(samples);
    const double p = static_cast<double>(hits) / n;
    const double z = 1.959963984540054;
    const double denom = 1.0 + z * z / n;
    const double centre = (p + z * z / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
    // The bounds are exact at the extremes; rounding would leave them slightly off.
    const double low = hits == 0 ? 0.0 : std::max(0.0, centre - half);
    const double high = hits == samples ? 1.0 : std::min(1.0, centre + half);
    return {p, low, high};
}

} // namespace qd
