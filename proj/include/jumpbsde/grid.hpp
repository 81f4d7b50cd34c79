#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace jumpbsde {

/// Strictly increasing sequence of time points t_0 < ... < t_N, N >= 1.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> points);

    /// Equispaced grid with `steps` intervals on [t0, t1].
    static TimeGrid uniform(double t0, double t1, std::size_t steps);

    std::size_t size() const { return points_.size(); }
    std::size_t steps() const { return points_.size() - 1; }
    double front() const { return points_.front(); }
    double back() const { return points_.back(); }
    double operator[](std::size_t i) const { return points_[i]; }
    std::span<const double> points() const { return points_; }

    /// Largest spacing between consecutive points.
    double max_step() const;

    /// Index of `t` if it coincides with a grid point (relative tolerance 1e-12).
    /// Throws std::domain_error otherwise.
    std::size_t index_of(double t) const;

    /// Index j with t_j <= t < t_{j+1}, clamped to [0, N-1]. Requires t within the grid span.
    std::size_t cell_of(double t) const;

    /// Sub-grid of points [first, last], inclusive.
    TimeGrid slice(std::size_t first, std::size_t last) const;

    /// Trapezoid-rule weights; sum equals back() - front().
    std::vector<double> trapezoid_weights() const;

    bool operator==(const TimeGrid& other) const = default;

private:
    std::vector<double> points_;
};

/// Lagrange interpolation of a row-major field (rows = grid points, `width` columns)
/// at time t, writing one row into `out`. Uses the four nodes around t (fewer when
/// the grid is shorter), which keeps the interpolant fourth-order accurate.
void interpolate_row_cubic(const TimeGrid& grid, std::span<const double> values,
                           std::size_t width, double t, std::span<double> out);

/// Piecewise-linear interpolation of the same layout.
void interpolate_row_linear(const TimeGrid& grid, std::span<const double> values,
                            std::size_t width, double t, std::span<double> out);

}  // namespace jumpbsde
