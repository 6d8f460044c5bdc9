#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "qd/core.hpp"

namespace qd {

struct Bounds {
    double low = 0.0;
    double high = 1.0;

    bool operator==(const Bounds&) const = default;
};

using CellIndex = std::vector<int>;

/// Per-dimension bin index. Cells are half-open boxes [low + i*w, low + (i+1)*w); values outside
/// the bounds (including exactly `high`) clamp to the nearest boundary cell.
///
/// Throws std::invalid_argument on a dimension mismatch and InvalidConfiguration when a bound is
/// empty or inverted or a bin count is not positive.
CellIndex grid_index(std::span<const double> descriptor, std::span<const Bounds> bounds,
                     std::span<const int> bins);

enum class InsertStatus { NewCell, Improved, Rejected };

const char* to_string(InsertStatus s) noexcept;

struct InsertOutcome {
    InsertStatus status = InsertStatus::Rejected;
    std::size_t cell = 0;
    /// Fitness of the elite before insertion, empty for a previously empty cell.
    std::optional<double> previous_fitness;
    /// Acceptance threshold of the cell before insertion (thresholded mode only).
    std::optional<double> previous_threshold;
    /// Improvement used for ranking: fitness gain over the incumbent (or the threshold in
    /// thresholded mode), the raw fitness for a new cell in plain mode.
    double improvement = 0.0;
    bool replaced_elite = false;

    bool accepted() const noexcept { return status != InsertStatus::Rejected; }
};

struct Elite {
    Vector descriptor;
    Individual individual;

    double fitness() const noexcept { return individual.evaluation.fitness; }
};

/// MAP-Elites grid with one elite per cell, optionally carrying a per-cell acceptance
/// threshold (CMA-MAE style soft elitism).
class GridArchive {
public:
    GridArchive(std::vector<Bounds> bounds, std::vector<int> bins);

    std::size_t dimensions() const noexcept { return bounds_.size(); }
    const std::vector<Bounds>& bounds() const noexcept { return bounds_; }
    const std::vector<int>& bins() const noexcept { return bins_; }
    std::size_t cell_count() const noexcept { return cells_.size(); }
    std::size_t size() const noexcept { return occupied_; }
    bool empty() const noexcept { return occupied_ == 0; }

    CellIndex index_of(std::span<const double> descriptor) const;
    std::size_t flat_index_of(std::span<const double> descriptor) const;
    std::size_t flatten(const CellIndex& index) const;
    CellIndex unflatten(std::size_t cell) const;

    /// Plain elitism: stores into an empty cell or replaces an elite with strictly lower fitness.
    /// Throws std::invalid_argument when the individual has no descriptor.
    InsertOutcome insert(const Individual& ind);
    /// Same, binning by an explicit descriptor (e.g. a placeholder for non-eligible individuals).
    InsertOutcome insert(const Individual& ind, std::span<const double> descriptor);

    /// Switches to thresholded mode: every cell threshold starts at `f_min`.
    void enable_thresholds(double f_min);
    bool has_thresholds() const noexcept { return !thresholds_.empty(); }
    double f_min() const noexcept { return f_min_; }
    double threshold(std::size_t cell) const;

    /// Accepts iff fitness > threshold; then threshold <- (1 - alpha) * threshold + alpha * fitness
    /// and the elite is replaced if the fitness beats it. Rejection leaves the archive untouched.
    InsertOutcome insert_thresholded(const Individual& ind, std::span<const double> descriptor,
                                     double alpha);

    const Elite* elite(std::size_t cell) const;
    /// Occupied cells in ascending flat-index order.
    std::vector<std::size_t> occupied_cells() const;
    std::vector<const Elite*> elites() const;

    /// Overwrites a cell; used when restoring a serialized archive.
    void restore(std::size_t cell, Elite elite, std::optional<double> threshold);

private:
    InsertOutcome insert_plain(const Individual& ind, std::span<const double> descriptor);

    std::vector<Bounds> bounds_;
    std::vector<int> bins_;
    std::vector<std::optional<Elite>> cells_;
    std::vector<double> thresholds_;
    double f_min_ = 0.0;
    std::size_t occupied_ = 0;
};

/// Line-delimited JSON: a header record, then one record per occupied cell in cell order.
void write_archive(std::ostream& out, const GridArchive& archive);
GridArchive read_archive(std::istream& in);

} // namespace qd
