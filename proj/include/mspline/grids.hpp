// Dense motion containers: per-frame displacement grids and fitted
// control-point grids. Both store row-major [row][point][xyz] doubles and
// are viewed as (rows) x (point_count*3) matrices by the solvers.

#pragma once

#include <cstddef>
#include <vector>

namespace mspline {

// T x n x 3 displacements relative to a base frame.
struct TrajectoryGrid {
    int frame_count = 0;
    int point_count = 0;
    std::vector<double> deltas;

    TrajectoryGrid() = default;
    TrajectoryGrid(int frames, int points)
        : frame_count(frames),
          point_count(points),
          deltas(static_cast<std::size_t>(frames) * static_cast<std::size_t>(points) * 3, 0.0) {}

    std::size_t columns() const { return static_cast<std::size_t>(point_count) * 3; }
    double* frame(int t) { return deltas.data() + static_cast<std::size_t>(t) * columns(); }
    const double* frame(int t) const {
        return deltas.data() + static_cast<std::size_t>(t) * columns();
    }
    double& at(int t, int p, int c) {
        return deltas[(static_cast<std::size_t>(t) * static_cast<std::size_t>(point_count) +
                       static_cast<std::size_t>(p)) *
                          3 +
                      static_cast<std::size_t>(c)];
    }
    double at(int t, int p, int c) const {
        return deltas[(static_cast<std::size_t>(t) * static_cast<std::size_t>(point_count) +
                       static_cast<std::size_t>(p)) *
                          3 +
                      static_cast<std::size_t>(c)];
    }
};

// k x n x 3 control points of a fitted spline, plus the degree and the
// frame count of the sequence they were fitted from (0 when unknown).
struct ControlGrid {
    int control_count = 0;
    int point_count = 0;
    int degree = 3;
    int source_frame_count = 0;
    std::vector<double> points;

    ControlGrid() = default;
    ControlGrid(int controls, int n_points, int spline_degree)
        : control_count(controls),
          point_count(n_points),
          degree(spline_degree),
          points(static_cast<std::size_t>(controls) * static_cast<std::size_t>(n_points) * 3,
                 0.0) {}

    std::size_t columns() const { return static_cast<std::size_t>(point_count) * 3; }
    double* row(int i) { return points.data() + static_cast<std::size_t>(i) * columns(); }
    const double* row(int i) const {
        return points.data() + static_cast<std::size_t>(i) * columns();
    }
};

}  // namespace mspline
