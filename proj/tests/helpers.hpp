#pragma once

#include <optional>
#include <sstream>
#include <string>

#include "qd/core.hpp"
#include "qd/grid_archive.hpp"

namespace qd::test {

inline Individual make_individual(IndividualId id, std::optional<Vector> descriptor, double fitness,
                                  bool success = false, Vector genome = {0.0, 0.0})
{
    Individual ind;
    ind.id = id;
    ind.genome = Genome(std::move(genome));
    ind.evaluation.descriptor = std::move(descriptor);
    ind.evaluation.fitness = fitness;
    ind.evaluation.success = success;
    return ind;
}

inline std::string serialize(const GridArchive& a)
{
    std::ostringstream out;
    write_archive(out, a);
    return out.str();
}

} // namespace qd::test
