#pragma once

#include <json.hpp>

#include "qd/core.hpp"

namespace qd::detail {

using nlohmann::json;

json optional_vector(const std::optional<Vector>& v);
std::optional<Vector> optional_vector(const json& j);

/// id, parent, generation, genome, descriptor-or-null, fitness, success.
json individual_to_json(const Individual& ind);
Individual individual_from_json(const json& j);

} // namespace qd::detail
