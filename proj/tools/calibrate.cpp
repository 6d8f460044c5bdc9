// Calibration helper for the planar domains: energy extrema of random rollouts and the
// outcome/success ratios of a candidate grasp geometry.
#include <cstdio>
#include <limits>

#include <CLI11.hpp>

#include "qd/domains.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Planar domain calibration"};
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
    double radius = -1, slip = -1;
    bool golden = false;
    app.add_option("--samples", samples);
    app.add_option("--seed", seed);
    app.add_option("--radius", radius);
    app.add_option("--slip", slip);
    app.add_flag("--golden", golden, "print the first successful genome");
    CLI11_PARSE(app, argc, argv);

    qd::GraspGeometry geo = qd::default_grasp_geometry();
    if (radius > 0)
        geo.object_radius = radius;
    if (slip > 0)
        geo.slip_displacement = slip;
    const qd::PlanarGraspDomain grasp(geo);
    const qd::DenseNavDomain nav;

    qd::Rng rng(seed);
    double emin = std::numeric_limits<double>::infinity(), emax = 0.0;
    double nmin = emin, nmax = 0.0;
    std::size_t touched = 0, grasped = 0, reached = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        const qd::Genome g = qd::uniform_random_genome(6, rng);
        const qd::Evaluation e = grasp.evaluate(g);
        emin = std::min(emin, e.stats.energy);
        emax = std::max(emax, e.stats.energy);
        touched += e.eligible();
        grasped += e.success;
        if (e.success && golden) {
            std::printf("golden:");
            for (double v : g.values())
                std::printf(" %.17g", v);
            std::printf(" fitness=%.17g\n", e.fitness);
            golden = false;
        }
        const qd::Evaluation n = nav.evaluate(g);
        nmin = std::min(nmin, n.stats.energy);
        nmax = std::max(nmax, n.stats.energy);
        reached += n.success;
    }
    const double total = static_cast<double>(samples);
    std::printf("grasp energy extrema: %.17g %.17g\n", emin, emax);
    std::printf("nav energy extrema:   %.17g %.17g\n", nmin, nmax);
    std::printf("eta_o=%.6f eta_s=%.6f (%zu successes)  nav success=%.6f\n", touched / total, grasped / total,
                grasped, reached / total);
    return 0;
}
