#include "jumpbsde/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace jumpbsde {

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.size() < 2) {
        throw std::domain_error("time grid needs at least 2 points");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!std::isfinite(points_[i])) {
            throw std::domain_error("time grid point " + std::to_string(i) + " is not finite");
        }
        if (i > 0 && !(points_[i] > points_[i - 1])) {
            throw std::domain_error("time grid is not strictly increasing at index " +
                                    std::to_string(i));
        }
    }
}

TimeGrid TimeGrid::uniform(double t0, double t1, std::size_t steps) {
    if (steps < 1) {
        throw std::domain_error("uniform grid needs at least one step");
    }
    if (!(t1 > t0)) {
        throw std::domain_error("uniform grid needs t1 > t0");
    }
    std::vector<double> pts(steps + 1);
    const double h = (t1 - t0) / static_cast<double>(steps);
    for (std::size_t i = 0; i <= steps; ++i) {
        pts[i] = t0 + h * static_cast<double>(i);
    }
    pts.back() = t1;
    return TimeGrid(std::move(pts));
}

double TimeGrid::max_step() const {
    double m = 0.0;
    for (std::size_t i = 1; i < points_.size(); ++i) {
        m = std::max(m, points_[i] - points_[i - 1]);
    }
    return m;
}

std::size_t TimeGrid::index_of(double t) const {
    const double tol = 1e-12 * std::max(1.0, std::abs(t));
    auto it = std::lower_bound(points_.begin(), points_.end(), t - tol);
    if (it != points_.end() && std::abs(*it - t) <= tol) {
        return static_cast<std::size_t>(it - points_.begin());
    }
    throw std::domain_error("time " + std::to_string(t) + " is not a grid point");
}

std::size_t TimeGrid::cell_of(double t) const {
    auto it = std::upper_bound(points_.begin(), points_.end(), t);
    std::size_t j = it == points_.begin() ? 0 : static_cast<std::size_t>(it - points_.begin()) - 1;
    return std::min(j, points_.size() - 2);
}

TimeGrid TimeGrid::slice(std::size_t first, std::size_t last) const {
    if (!(first < last) || last >= points_.size()) {
        throw std::domain_error("invalid grid slice");
    }
    return TimeGrid(std::vector<double>(points_.begin() + static_cast<std::ptrdiff_t>(first),
                                        points_.begin() + static_cast<std::ptrdiff_t>(last) + 1));
}

std::vector<double> TimeGrid::trapezoid_weights() const {
    std::vector<double> w(points_.size(), 0.0);
    for (std::size_t i = 1; i < points_.size(); ++i) {
        const double half = 0.5 * (points_[i] - points_[i - 1]);
        w[i - 1] += half;
        w[i] += half;
    }
    return w;
}

void interpolate_row_cubic(const TimeGrid& grid, std::span<const double> values,
                           std::size_t width, double t, std::span<double> out) {
    const std::size_t n = grid.size();
    const std::size_t order = std::min<std::size_t>(4, n);
    const std::size_t j = grid.cell_of(t);
    // Window of `order` consecutive nodes, centred on cell j where possible.
    std::size_t lo = j >= 1 ? j - 1 : 0;
    if (lo + order > n) {
        lo = n - order;
    }
    double weights[4];
    for (std::size_t a = 0; a < order; ++a) {
        double w = 1.0;
        const double ta = grid[lo + a];
        for (std::size_t b = 0; b < order; ++b) {
            if (b != a) {
                w *= (t - grid[lo + b]) / (ta - grid[lo + b]);
            }
        }
        weights[a] = w;
    }
    for (std::size_t c = 0; c < width; ++c) {
        double acc = 0.0;
        for (std::size_t a = 0; a < order; ++a) {
            acc += weights[a] * values[(lo + a) * width + c];
        }
        out[c] = acc;
    }
}

void interpolate_row_linear(const TimeGrid& grid, std::span<const double> values,
                            std::size_t width, double t, std::span<double> out) {
    const std::size_t j = grid.cell_of(t);
    const double t0 = grid[j];
    const double t1 = grid[j + 1];
    const double theta = (t - t0) / (t1 - t0);
    for (std::size_t c = 0; c < width; ++c) {
        const double a = values[j * width + c];
        const double b = values[(j + 1) * width + c];
        out[c] = a + theta * (b - a);
    }
}

}  // namespace jumpbsde
