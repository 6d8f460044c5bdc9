#include "qd/grid_archive.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "json_codec.hpp"
#include "qd/errors.hpp"

namespace qd {

namespace {

constexpr int kArchiveFormatVersion = 1;
constexpr const char* kArchiveFormat = "qd.grid_archive";

void validate_geometry(std::span<const Bounds> bounds, std::span<const int> bins)
{
    if (bounds.size() != bins.size())
        throw std::invalid_argument("bounds and bins dimensions differ");
    if (bounds.empty())
        throw InvalidConfiguration("grid archive needs at least one dimension");
    for (std::size_t d = 0; d < bounds.size(); ++d) {
        if (!(bounds[d].low < bounds[d].high))
            throw InvalidConfiguration("bounds[" + std::to_string(d) + "]", "low must be below high");
        if (bins[d] <= 0)
            throw InvalidConfiguration("bins[" + std::to_string(d) + "]", "must be positive");
    }
}

} // namespace

const char* to_string(InsertStatus s) noexcept
{
    switch (s) {
    case InsertStatus::NewCell:
        return "new_cell";
    case InsertStatus::Improved:
        return "improved";
    case InsertStatus::Rejected:
        return "rejected";
    }
    return "?";
}

CellIndex grid_index(std::span<const double> descriptor, std::span<const Bounds> bounds,
                     std::span<const int> bins)
{
    validate_geometry(bounds, bins);
    if (descriptor.size() != bounds.size())
        throw std::invalid_argument("descriptor has dimension " + std::to_string(descriptor.size()) +
                                    ", archive expects " + std::to_string(bounds.size()));
    CellIndex index(bounds.size());
    for (std::size_t d = 0; d < bounds.size(); ++d) {
        const double t = (descriptor[d] - bounds[d].low) / (bounds[d].high - bounds[d].low);
        const double raw = std::floor(t * bins[d]);
        // NaN lands in cell 0 like any value below the bounds.
        int i = 0;
        if (raw >= bins[d])
            i = bins[d] - 1;
        else if (raw > 0)
            i = static_cast<int>(raw);
        index[d] = i;
    }
    return index;
}

GridArchive::GridArchive(std::vector<Bounds> bounds, std::vector<int> bins)
    : bounds_(std::move(bounds)), bins_(std::move(bins))
{
    validate_geometry(bounds_, bins_);
    std::size_t total = 1;
    for (int b : bins_)
        total *= static_cast<std::size_t>(b);
    cells_.resize(total);
}

CellIndex GridArchive::index_of(std::span<const double> descriptor) const
{
    return grid_index(descriptor, bounds_, bins_);
}

std::size_t GridArchive::flat_index_of(std::span<const double> descriptor) const
{
    return flatten(index_of(descriptor));
}

std::size_t GridArchive::flatten(const CellIndex& index) const
{
    if (index.size() != bins_.size())
        throw std::invalid_argument("cell index dimension mismatch");
    std::size_t flat = 0;
    for (std::size_t d = 0; d < bins_.size(); ++d) {
        if (index[d] < 0 || index[d] >= bins_[d])
            throw std::invalid_argument("cell index out of range");
        flat = flat * static_cast<std::size_t>(bins_[d]) + static_cast<std::size_t>(index[d]);
    }
    return flat;
}

CellIndex GridArchive::unflatten(std::size_t cell) const
{
    if (cell >= cells_.size())
        throw std::invalid_argument("cell out of range");
    CellIndex index(bins_.size());
    for (std::size_t d = bins_.size(); d-- > 0;) {
        index[d] = static_cast<int>(cell % static_cast<std::size_t>(bins_[d]));
        cell /= static_cast<std::size_t>(bins_[d]);
    }
    return index;
}

InsertOutcome GridArchive::insert(const Individual& ind)
{
    if (!ind.evaluation.descriptor)
        throw std::invalid_argument("individual " + std::to_string(ind.id) + " has no descriptor");
    return insert_plain(ind, *ind.evaluation.descriptor);
}

InsertOutcome GridArchive::insert(const Individual& ind, std::span<const double> descriptor)
{
    return insert_plain(ind, descriptor);
}

InsertOutcome GridArchive::insert_plain(const Individual& ind, std::span<const double> descriptor)
{
    InsertOutcome out;
    out.cell = flat_index_of(descriptor);
    auto& slot = cells_[out.cell];
    const double f = ind.evaluation.fitness;
    if (!slot) {
        slot = Elite{Vector(descriptor.begin(), descriptor.end()), ind};
        ++occupied_;
        out.status = InsertStatus::NewCell;
        out.improvement = f;
        out.replaced_elite = true;
        return out;
    }
    out.previous_fitness = slot->fitness();
    // Ties keep the incumbent.
    if (f > slot->fitness()) {
        out.status = InsertStatus::Improved;
        out.improvement = f - slot->fitness();
        out.replaced_elite = true;
        *slot = Elite{Vector(descriptor.begin(), descriptor.end()), ind};
    } else {
        out.status = InsertStatus::Rejected;
        out.improvement = f - slot->fitness();
    }
    return out;
}

void GridArchive::enable_thresholds(double f_min)
{
    f_min_ = f_min;
    thresholds_.assign(cells_.size(), f_min);
}

double GridArchive::threshold(std::size_t cell) const
{
    if (!has_thresholds())
        throw InvalidState("archive has no thresholds");
    return thresholds_.at(cell);
}

InsertOutcome GridArchive::insert_thresholded(const Individual& ind, std::span<const double> descriptor,
                                              double alpha)
{
    if (!has_thresholds())
        throw InvalidState("archive has no thresholds");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("alpha must lie in [0, 1]");
    InsertOutcome out;
    out.cell = flat_index_of(descriptor);
    auto& slot = cells_[out.cell];
    double& t = thresholds_[out.cell];
    const double f = ind.evaluation.fitness;
    out.previous_threshold = t;
    if (slot)
        out.previous_fitness = slot->fitness();
    out.improvement = f - t;
    if (!(f > t)) {
        out.status = InsertStatus::Rejected;
        return out;
    }
    out.status = slot ? InsertStatus::Improved : InsertStatus::NewCell;
    t = (1.0 - alpha) * t + alpha * f;
    if (!slot || f > slot->fitness()) {
        if (!slot)
            ++occupied_;
        slot = Elite{Vector(descriptor.begin(), descriptor.end()), ind};
        out.replaced_elite = true;
    }
    return out;
}

const Elite* GridArchive::elite(std::size_t cell) const
{
    const auto& slot = cells_.at(cell);
    return slot ? &*slot : nullptr;
}

std::vector<std::size_t> GridArchive::occupied_cells() const
{
    std::vector<std::size_t> out;
    out.reserve(occupied_);
    for (std::size_t c = 0; c < cells_.size(); ++c)
        if (cells_[c])
            out.push_back(c);
    return out;
}

std::vector<const Elite*> GridArchive::elites() const
{
    std::vector<const Elite*> out;
    out.reserve(occupied_);
    for (const auto& slot : cells_)
        if (slot)
            out.push_back(&*slot);
    return out;
}

void GridArchive::restore(std::size_t cell, Elite elite, std::optional<double> threshold)
{
    auto& slot = cells_.at(cell);
    if (!slot)
        ++occupied_;
    slot = std::move(elite);
    if (threshold) {
        if (!has_thresholds())
            throw InvalidState("archive has no thresholds");
        thresholds_[cell] = *threshold;
    }
}

void write_archive(std::ostream& out, const GridArchive& archive)
{
    using detail::json;
    json header;
    header["format"] = kArchiveFormat;
    header["format_version"] = kArchiveFormatVersion;
    json bounds = json::array();
    for (const auto& b : archive.bounds())
        bounds.push_back({b.low, b.high});
    header["bounds"] = bounds;
    header["bins"] = archive.bins();
    header["f_min"] = archive.has_thresholds() ? json(archive.f_min()) : json(nullptr);
    out << header.dump() << '\n';

    for (std::size_t cell : archive.occupied_cells()) {
        const Elite& e = *archive.elite(cell);
        json rec;
        rec["cell"] = archive.unflatten(cell);
        rec["descriptor"] = e.descriptor;
        rec["fitness"] = e.fitness();
        rec["genome"] = e.individual.genome.values();
        rec["success"] = e.individual.evaluation.success;
        rec["eligible"] = e.individual.eligible();
        rec["id"] = e.individual.id;
        rec["parent"] = e.individual.parent_id ? json(*e.individual.parent_id) : json(nullptr);
        rec["generation"] = e.individual.generation;
        if (archive.has_thresholds())
            rec["threshold"] = archive.threshold(cell);
        out << rec.dump() << '\n';
    }
}

GridArchive read_archive(std::istream& in)
{
    using detail::json;
    std::string line;
    if (!std::getline(in, line))
        throw InvalidConfiguration("archive stream is empty");
    const json header = json::parse(line);
    if (header.value("format", "") != kArchiveFormat)
        throw InvalidConfiguration("format", "not a grid archive");
    if (header.value("format_version", 0) != kArchiveFormatVersion)
        throw InvalidConfiguration("format_version", "unsupported grid archive version");
    std::vector<Bounds> bounds;
    for (const auto& b : header.at("bounds"))
        bounds.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
    GridArchive archive(std::move(bounds), header.at("bins").get<std::vector<int>>());
    if (!header.at("f_min").is_null())
        archive.enable_thresholds(header.at("f_min").get<double>());

    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const json rec = json::parse(line);
        const std::size_t cell = archive.flatten(rec.at("cell").get<CellIndex>());
        Elite e;
        e.descriptor = rec.at("descriptor").get<Vector>();
        Individual& ind = e.individual;
        ind.id = rec.at("id").get<IndividualId>();
        if (!rec.at("parent").is_null())
            ind.parent_id = rec.at("parent").get<IndividualId>();
        ind.generation = rec.at("generation").get<int>();
        ind.genome = Genome(rec.at("genome").get<Vector>());
        ind.evaluation.fitness = rec.at("fitness").get<double>();
        ind.evaluation.success = rec.at("success").get<bool>();
        if (rec.at("eligible").get<bool>())
            ind.evaluation.descriptor = e.descriptor;
        std::optional<double> threshold;
        if (rec.contains("threshold"))
            threshold = rec.at("threshold").get<double>();
        archive.restore(cell, std::move(e), threshold);
    }
    return archive;
}

} // namespace qd
