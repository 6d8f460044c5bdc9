#include "qd/domains.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qd {

namespace {

double normalized_energy(double energy, double lo, double hi)
{
    if (!(hi > lo))
        return 0.0;
    return std::clamp((hi - energy) / (hi - lo), 0.0, 1.0);
}

double cross(const Point& o, const Point& a, const Point& b)
{
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

bool on_segment(const Point& a, const Point& b, const Point& p)
{
    return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
           std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

/// Closed-segment intersection; touching counts.
bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2)
{
    const double d1 = cross(q1, q2, p1), d2 = cross(q1, q2, p2);
    const double d3 = cross(p1, p2, q1), d4 = cross(p1, p2, q2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    return (d1 == 0 && on_segment(q1, q2, p1)) || (d2 == 0 && on_segment(q1, q2, p2)) ||
           (d3 == 0 && on_segment(p1, p2, q1)) || (d4 == 0 && on_segment(p1, p2, q2));
}

} // namespace

// ---------------------------------------------------------------------------------------------

GraspGeometry default_grasp_geometry()
{
    GraspGeometry g;
    // Extrema of trajectory_energy over 1e5 uniform genomes, seed 1 (tools/calibrate).
    g.energy_min = 7.0563279407718051e-09;
    g.energy_max = 3.758770779025092e-05;
    return g;
}

GraspTrajectory simulate_grasp(const Genome& g, const GraspGeometry& geo)
{
    const int steps = geo.episode_length;
    const double r = geo.object_radius;
    GraspTrajectory tr;
    tr.positions = waypoint_trajectory(g, steps, geo.start, geo.workspace);
    tr.contact.assign(tr.positions.size(), false);
    tr.object_height.assign(tr.positions.size(), r);

    Point object = geo.object_center();
    bool attached = false;
    for (int t = 0; t <= steps; ++t) {
        const auto i = static_cast<std::size_t>(t);
        const Point& p = tr.positions[i];
        const double displacement = t > 0 ? (p - tr.positions[i - 1]).norm() : 0.0;
        if (attached) {
            if (displacement > geo.slip_displacement) {
                attached = false;
                tr.detach_step = t;
                object = {object.x(), r};
            } else {
                object = {p.x(), std::max(p.y() - r, r)};
            }
        }
        if (!tr.first_touch && (p - object).norm() <= r) {
            // The gripper closes on first contact; it holds only a slow touch from above.
            tr.first_touch = t;
            if (displacement <= geo.slip_displacement && p.y() >= object.y()) {
                attached = true;
                tr.attach_step = t;
                object = {p.x(), std::max(p.y() - r, r)};
            }
        }
        tr.contact[i] = attached || (p - object).norm() <= r;
        if (tr.contact[i] && tr.first_touch)
            tr.contact_points.push_back(p - object);
        tr.object_height[i] = object.y();
    }
    return tr;
}

bool grasp_success(const GraspTrajectory& traj, const GraspGeometry& geo)
{
    if (!traj.attach_step || traj.detach_step)
        return false;
    const int steps = geo.episode_length;
    const double rest = geo.object_radius;
    for (int t = steps - geo.hold_steps + 1; t <= steps; ++t)
        if (!(traj.object_height[static_cast<std::size_t>(t)] > rest))
            return false;
    return true;
}

int discontinuity_steps(const GraspTrajectory& traj)
{
    if (!traj.first_touch)
        return 0;
    const int steps = static_cast<int>(traj.contact.size()) - 1;
    for (int t = *traj.first_touch; t <= steps; ++t)
        if (!traj.contact[static_cast<std::size_t>(t)])
            return steps - t;
    return 0;
}

double contact_variance(const GraspTrajectory& traj)
{
    const auto& pts = traj.contact_points;
    if (pts.empty())
        return 0.0;
    Point mean = Point::Zero();
    for (const auto& p : pts)
        mean += p;
    mean /= static_cast<double>(pts.size());
    double var = 0.0;
    for (const auto& p : pts)
        var += (p - mean).squaredNorm();
    return var / static_cast<double>(pts.size());
}

double fitness_grasp(const GraspTrajectory& traj, bool success, const GraspGeometry& geo)
{
    if (!success)
        return 0.0;
    const double energy = normalized_energy(trajectory_energy(traj.positions), geo.energy_min, geo.energy_max);

    std::size_t touches = 0;
    for (bool c : traj.contact)
        touches += c ? 1 : 0;
    std::size_t continuous = 0;
    if (traj.first_touch)
        for (auto t = static_cast<std::size_t>(*traj.first_touch); t < traj.contact.size() && traj.contact[t]; ++t)
            ++continuous;
    const double spread = touches && continuous
                              ? contact_variance(traj) / (static_cast<double>(touches) * static_cast<double>(continuous))
                              : 0.0;
    const double raw = -(spread + discontinuity_steps(traj));
    const double steps = static_cast<double>(traj.contact.size() - 1);
    const double stability = std::clamp(1.0 + raw / steps, 0.0, 1.0);
    return 0.5 * energy + 0.5 * stability;
}

PlanarGraspDomain::PlanarGraspDomain(GraspGeometry geo) : geo_(std::move(geo))
{
    spec_.name = "planar-grasp";
    spec_.genome_length = 6;
    spec_.episode_length = geo_.episode_length;
    spec_.descriptor_dim = 2;
    const Point c = geo_.object_center();
    const double r = geo_.object_radius;
    spec_.descriptor_bounds = {{c.x() - r, c.x() + r}, {c.y() - r, c.y() + r}};
    spec_.bins = geo_.bins;
    spec_.density = Density::Sparse;
}

Evaluation PlanarGraspDomain::evaluate(const Genome& g) const
{
    const GraspTrajectory tr = simulate_grasp(g, geo_);
    Evaluation e;
    if (tr.first_touch) {
        const Point& p = tr.positions[static_cast<std::size_t>(*tr.first_touch)];
        e.descriptor = Vector{p.x(), p.y()};
    }
    e.success = grasp_success(tr, geo_);
    e.fitness = fitness_grasp(tr, e.success, geo_);
    e.stats.energy = trajectory_energy(tr.positions);
    e.stats.contact_variance = contact_variance(tr);
    e.stats.discontinuity_steps = discontinuity_steps(tr);
    e.stats.first_touch_step = tr.first_touch;
    return e;
}

// ---------------------------------------------------------------------------------------------

NavGeometry default_nav_geometry()
{
    NavGeometry g;
    // Same controller, start and workspace as the grasp domain, hence the same extrema.
    g.energy_min = 7.0563279407718051e-09;
    g.energy_max = 3.758770779025092e-05;
    return g;
}

std::vector<Point> navigate(const std::vector<Point>& targets, const std::vector<Wall>& walls)
{
    std::vector<Point> out;
    out.reserve(targets.size());
    if (targets.empty())
        return out;
    out.push_back(targets.front());
    for (std::size_t t = 1; t < targets.size(); ++t) {
        const Point& from = out.back();
        const Point& to = targets[t];
        const bool blocked = std::any_of(walls.begin(), walls.end(),
                                         [&](const Wall& w) { return segments_intersect(from, to, w.a, w.b); });
        out.push_back(blocked ? from : to);
    }
    return out;
}

DenseNavDomain::DenseNavDomain(NavGeometry geo) : geo_(std::move(geo))
{
    spec_.name = "dense-nav";
    spec_.genome_length = 6;
    spec_.episode_length = geo_.episode_length;
    spec_.descriptor_dim = 2;
    spec_.descriptor_bounds = {geo_.workspace.x, geo_.workspace.y};
    spec_.bins = geo_.bins;
    spec_.density = Density::Dense;
}

Evaluation DenseNavDomain::evaluate(const Genome& g) const
{
    const std::vector<Point> targets = waypoint_trajectory(g, geo_.episode_length, geo_.start, geo_.workspace);
    const std::vector<Point> path = navigate(targets, geo_.walls);
    const Point& end = path.back();
    Evaluation e;
    e.descriptor = Vector{end.x(), end.y()};
    e.stats.energy = trajectory_energy(targets);
    e.success = (end - geo_.goal).norm() <= geo_.goal_radius;
    if (e.success)
        e.fitness = 0.5 + 0.5 * normalized_energy(e.stats.energy, geo_.energy_min, geo_.energy_max);
    return e;
}

// ---------------------------------------------------------------------------------------------

MicroDomain::MicroDomain()
{
    spec_.name = "micro";
    spec_.genome_length = 2;
    spec_.episode_length = 0;
    spec_.descriptor_dim = 2;
    spec_.descriptor_bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
    spec_.bins = {20, 20};
    spec_.density = Density::Sparse;
}

Evaluation MicroDomain::evaluate(const Genome& g) const
{
    if (g.size() != 2)
        throw std::invalid_argument("micro domain expects 2 genes");
    const double radius = std::hypot(g[0], g[1]);
    Evaluation e;
    if (radius <= kEligibleRadius)
        e.descriptor = g.values();
    if (radius <= kSuccessRadius) {
        e.success = true;
        e.fitness = 1.0 - 0.5 * radius / kSuccessRadius;
    }
    return e;
}

// ---------------------------------------------------------------------------------------------

std::vector<std::string> domain_names()
{
    return {"planar-grasp", "dense-nav", "micro"};
}

std::unique_ptr<Domain> make_domain(std::string_view name)
{
    if (name == "planar-grasp")
        return std::make_unique<PlanarGraspDomain>();
    if (name == "dense-nav")
        return std::make_unique<DenseNavDomain>();
    if (name == "micro")
        return std::make_unique<MicroDomain>();
    throw std::invalid_argument("unknown domain '" + std::string(name) + "'");
}

} // namespace qd
