#include "json_codec.hpp"

namespace qd::detail {

json optional_vector(const std::optional<Vector>& v)
{
    return v ? json(*v) : json(nullptr);
}

std::optional<Vector> optional_vector(const json& j)
{
    if (j.is_null())
        return std::nullopt;
    return j.get<Vector>();
}

json individual_to_json(const Individual& ind)
{
    json j;
    j["id"] = ind.id;
    j["parent"] = ind.parent_id ? json(*ind.parent_id) : json(nullptr);
    j["generation"] = ind.generation;
    j["genome"] = ind.genome.values();
    j["descriptor"] = optional_vector(ind.evaluation.descriptor);
    j["fitness"] = ind.evaluation.fitness;
    j["success"] = ind.evaluation.success;
    return j;
}

Individual individual_from_json(const json& j)
{
    Individual ind;
    ind.id = j.at("id").get<IndividualId>();
    if (!j.at("parent").is_null())
        ind.parent_id = j.at("parent").get<IndividualId>();
    ind.generation = j.at("generation").get<int>();
    ind.genome = Genome(j.at("genome").get<Vector>());
    ind.evaluation.descriptor = optional_vector(j.at("descriptor"));
    ind.evaluation.fitness = j.at("fitness").get<double>();
    ind.evaluation.success = j.at("success").get<bool>();
    return ind;
}

} // namespace qd::detail
