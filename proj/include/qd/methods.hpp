#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace qd {

enum class Root { NS, ME, None };
enum class Container { UA, SA, None };
enum class PopulationKind { PP, NPP };
enum class Goal { RIBS, Coverage, Optimum };

/// Marked columns of each taxonomy group. A group may have zero or several marks.
struct Taxonomy {
    std::vector<Root> root;
    std::vector<Container> container;
    std::vector<PopulationKind> population;
    std::vector<Goal> goal;

    bool operator==(const Taxonomy&) const = default;
};

/// Tunable parameters, all methods share one set; each method reads the ones it uses.
struct Hyperparameters {
    std::size_t mu = 100;
    std::size_t lambda = 100;
    std::size_t novelty_additions = 40;
    std::size_t k = 15;
    double mutation_sigma = 0.5;
    double mutation_prob = 0.3;
    std::size_t tournament_size = 15;
    std::size_t local_neighbors = 50;
    std::size_t serene_chunk = 1000;
    std::size_t serene_emitter_population = 6;
    std::size_t serene_novelty_additions = 5;
    double serene_sigma0 = 0.1;
    int serene_patience = 2;
    std::size_t cma_batch = 36;
    std::size_t cma_emitters = 15;
    double cma_sigma0 = 0.5;
    int cma_restart_patience = 5;
    double mae_alpha = 0.01;
    double mae_f_min = -1.0;

    bool operator==(const Hyperparameters&) const = default;
};

/// Override keys accepted by build_method, in a stable order.
std::vector<std::string> hyperparameter_keys();

struct MethodSpec {
    std::string name;
    Taxonomy taxonomy;
    Hyperparameters params;
};

/// Canonical method names in registry order.
const std::vector<std::string>& method_names();

/// Throws std::invalid_argument for an unknown name and InvalidConfiguration (carrying the key)
/// for an unknown or out-of-range override.
MethodSpec build_method(std::string_view name, const std::map<std::string, double>& overrides = {});

std::string to_string(Root r);
std::string to_string(Container c);
std::string to_string(PopulationKind p);
std::string to_string(Goal g);

} // namespace qd
