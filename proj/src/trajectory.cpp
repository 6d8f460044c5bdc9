#include "qd/trajectory.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

#include <Eigen/Dense>

#include "qd/errors.hpp"

namespace qd {

Point Workspace::clamp(const Point& p) const
{
    return {std::clamp(p.x(), x.low, x.high), std::clamp(p.y(), y.low, y.high)};
}

Point Workspace::denormalize(double u, double v) const
{
    return {x.low + 0.5 * (u + 1.0) * (x.high - x.low), y.low + 0.5 * (v + 1.0) * (y.high - y.low)};
}

namespace {

/// Second derivatives at the four knots of a clamped spline with spacing h and zero end slopes.
Eigen::Vector4d clamped_moments(const std::array<double, 4>& y, double h)
{
    Eigen::Matrix4d a;
    a << 2, 1, 0, 0,
         1, 4, 1, 0,
         0, 1, 4, 1,
         0, 0, 1, 2;
    Eigen::Vector4d rhs;
    rhs[0] = 6.0 * (y[1] - y[0]) / (h * h);
    rhs[1] = 6.0 * (y[2] - 2.0 * y[1] + y[0]) / (h * h);
    rhs[2] = 6.0 * (y[3] - 2.0 * y[2] + y[1]) / (h * h);
    rhs[3] = -6.0 * (y[3] - y[2]) / (h * h);
    return a.partialPivLu().solve(rhs);
}

double spline_at(const std::array<double, 4>& y, const Eigen::Vector4d& m, double h, double t)
{
    const int seg = std::min(2, static_cast<int>(t / h));
    const double a = t - seg * h;        // distance from the left knot
    const double b = (seg + 1) * h - t;  // distance to the right knot
    return m[seg] * b * b * b / (6.0 * h) + m[seg + 1] * a * a * a / (6.0 * h) +
           (y[seg] / h - m[seg] * h / 6.0) * b + (y[seg + 1] / h - m[seg + 1] * h / 6.0) * a;
}

} // namespace

std::vector<Point> waypoint_trajectory(const Genome& g, int steps, const Point& start, const Workspace& ws)
{
    if (steps <= 0 || steps % 3 != 0)
        throw InvalidConfiguration("episode_length", "must be a positive multiple of 3");
    if (g.size() != 6)
        throw std::invalid_argument("waypoint controller expects 6 genes");

    std::array<Point, 4> knots{start, ws.denormalize(g[0], g[1]), ws.denormalize(g[2], g[3]),
                               ws.denormalize(g[4], g[5])};
    const std::array<double, 4> xs{knots[0].x(), knots[1].x(), knots[2].x(), knots[3].x()};
    const std::array<double, 4> ys{knots[0].y(), knots[1].y(), knots[2].y(), knots[3].y()};
    const int third = steps / 3;
    const double h = third;
    const Eigen::Vector4d mx = clamped_moments(xs, h);
    const Eigen::Vector4d my = clamped_moments(ys, h);

    std::vector<Point> out(static_cast<std::size_t>(steps) + 1);
    for (int t = 0; t <= steps; ++t) {
        if (t % third == 0) {
            out[static_cast<std::size_t>(t)] = ws.clamp(knots[static_cast<std::size_t>(t / third)]);
            continue;
        }
        out[static_cast<std::size_t>(t)] = ws.clamp({spline_at(xs, mx, h, t), spline_at(ys, my, h, t)});
    }
    return out;
}

double trajectory_energy(const std::vector<Point>& positions)
{
    double e = 0.0;
    for (std::size_t t = 1; t + 1 < positions.size(); ++t)
        e += (positions[t + 1] - 2.0 * positions[t] + positions[t - 1]).squaredNorm();
    return e;
}

} // namespace qd
