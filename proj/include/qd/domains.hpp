#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qd/core.hpp"
#include "qd/grid_archive.hpp"
#include "qd/trajectory.hpp"

namespace qd {

enum class Density { Dense, Sparse };

struct DomainSpec {
    std::string name;
    std::size_t genome_length = 0;
    int episode_length = 0;
    std::size_t descriptor_dim = 0;
    std::vector<Bounds> descriptor_bounds;
    std::vector<int> bins;
    Density density = Density::Sparse;
};

/// Deterministic, stateless evaluator. evaluate() is safe to call concurrently.
class Domain {
public:
    virtual ~Domain() = default;
    virtual const DomainSpec& spec() const noexcept = 0;
    virtual Evaluation evaluate(const Genome& g) const = 0;

    const std::string& name() const noexcept { return spec().name; }
};

// ---------------------------------------------------------------------------------------------
// Planar grasp

/// Geometry of the planar grasping analog, format version 1. The object is a disk resting on
/// the table line y = 0 at the horizontal center of the workspace.
struct GraspGeometry {
    static constexpr int kVersion = 1;

    Workspace workspace{{0.0, 1.0}, {0.0, 0.7}};
    Point start{0.1, 0.6};
    double object_radius = 0.07;
    double object_x = 0.5;
    /// Largest per-step end-effector displacement a closed gripper can hold the object through.
    double slip_displacement = 0.0015;
    int episode_length = 600;
    int hold_steps = 10;
    std::vector<int> bins{60, 60};
    /// Energy extrema of uniform random rollouts, used to normalize the energy term.
    double energy_min = 0.0;
    double energy_max = 1.0;

    Point object_center() const { return {object_x, object_radius}; }
};

/// Shipped calibration.
GraspGeometry default_grasp_geometry();

/// Per-step record of a grasp episode; all vectors have episode_length + 1 entries (index 0 is
/// the initial state).
struct GraspTrajectory {
    std::vector<Point> positions;
    std::vector<bool> contact;
    std::vector<double> object_height;
    std::optional<int> first_touch;
    std::optional<int> attach_step;
    std::optional<int> detach_step;
    /// End-effector position relative to the object center at each contact step.
    std::vector<Point> contact_points;
};

GraspTrajectory simulate_grasp(const Genome& g, const GraspGeometry& geo);

/// Object lifted above its resting height and still held for the final hold_steps steps.
bool grasp_success(const GraspTrajectory& traj, const GraspGeometry& geo);

/// Steps from the first loss of contact after the first touch to the episode end (0 if never lost).
int discontinuity_steps(const GraspTrajectory& traj);

/// Variance of the contact points, summed over both axes.
double contact_variance(const GraspTrajectory& traj);

/// 0 when not successful, otherwise 0.5 * normalized energy term + 0.5 * normalized stability
/// term, each in [0, 1].
double fitness_grasp(const GraspTrajectory& traj, bool success, const GraspGeometry& geo);

class PlanarGraspDomain final : public Domain {
public:
    explicit PlanarGraspDomain(GraspGeometry geo = default_grasp_geometry());

    const DomainSpec& spec() const noexcept override { return spec_; }
    Evaluation evaluate(const Genome& g) const override;
    const GraspGeometry& geometry() const noexcept { return geo_; }

private:
    GraspGeometry geo_;
    DomainSpec spec_;
};

// ---------------------------------------------------------------------------------------------
// Dense navigation

struct Wall {
    Point a;
    Point b;
};

/// Maze with a horizontal wall. The descriptor is the final position, always defined.
struct NavGeometry {
    static constexpr int kVersion = 1;

    Workspace workspace{{0.0, 1.0}, {0.0, 0.7}};
    Point start{0.1, 0.6};
    Point goal{0.1, 0.1};
    double goal_radius = 0.05;
    std::vector<Wall> walls{{{0.0, 0.35}, {0.75, 0.35}}};
    int episode_length = 600;
    std::vector<int> bins{50, 35};
    double energy_min = 0.0;
    double energy_max = 1.0;
};

NavGeometry default_nav_geometry();

/// Executed positions: the end effector moves to each target unless the straight move crosses a
/// wall, in which case it stays put for that step.
std::vector<Point> navigate(const std::vector<Point>& targets, const std::vector<Wall>& walls);

class DenseNavDomain final : public Domain {
public:
    explicit DenseNavDomain(NavGeometry geo = default_nav_geometry());

    const DomainSpec& spec() const noexcept override { return spec_; }
    Evaluation evaluate(const Genome& g) const override;
    const NavGeometry& geometry() const noexcept { return geo_; }

private:
    NavGeometry geo_;
    DomainSpec spec_;
};

// ---------------------------------------------------------------------------------------------
// Micro domain: closed form, for enumeration oracles.

class MicroDomain final : public Domain {
public:
    static constexpr double kEligibleRadius = 0.8;
    static constexpr double kSuccessRadius = 0.2;

    MicroDomain();

    const DomainSpec& spec() const noexcept override { return spec_; }
    Evaluation evaluate(const Genome& g) const override;

private:
    DomainSpec spec_;
};

/// Canonical names: planar-grasp, dense-nav, micro.
std::vector<std::string> domain_names();

/// Throws std::invalid_argument for an unknown name.
std::unique_ptr<Domain> make_domain(std::string_view name);

} // namespace qd
