#pragma once

#include <vector>

#include <Eigen/Core>

#include "qd/core.hpp"
#include "qd/grid_archive.hpp"

namespace qd {

using Point = Eigen::Vector2d;

/// Axis-aligned planar box (meters).
struct Workspace {
    Bounds x{0.0, 1.0};
    Bounds y{0.0, 0.7};

    Point clamp(const Point& p) const;
    /// Maps a normalized coordinate pair in [-1, 1]^2 into the box.
    Point denormalize(double u, double v) const;
};

/// Open-loop end-effector path through three waypoints encoded as six normalized genes
/// (x1, y1, x2, y2, x3, y3). Returns `steps + 1` positions: index 0 is `start`, waypoint i is
/// reached exactly at index i * steps / 3. The path is a clamped cubic spline (zero velocity
/// at both ends) with every position clamped into the workspace.
///
/// Throws InvalidConfiguration if `steps` is not a positive multiple of 3 and
/// std::invalid_argument if the genome does not have six genes.
std::vector<Point> waypoint_trajectory(const Genome& g, int steps, const Point& start, const Workspace& ws);

/// Sum over interior steps of the squared second difference of the positions.
double trajectory_energy(const std::vector<Point>& positions);

} // namespace qd
