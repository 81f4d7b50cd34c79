#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "jumpbsde/bsde_core.hpp"

namespace jumpbsde {

/// Van der Corput radical inverse of `index` in `base`.
double radical_inverse(std::uint64_t index, unsigned base);

/// Halton points describing the unit (y, z)-ball: a signed y fraction, a radial
/// fraction for z and a raw direction over the K states. Fractions stay strictly
/// below one so scaled points sit inside the open ball.
class UnitBallSet {
public:
    UnitBallSet(std::size_t count, std::size_t states);

    std::size_t size() const { return count_; }
    std::size_t states() const { return states_; }

    /// Point `i` scaled to radius `radius` at (t, x): writes z into `z_out` (z(x) = 0,
    /// ||z|| = radial fraction * radius under the model's norm) and returns y; the
    /// z norm goes to `z_norm_out`.
    double materialize(const MarkovModel& model, double t, StateIndex x, double radius,
                       std::size_t i, std::span<double> z_out, double& z_norm_out) const;

private:
    std::size_t count_;
    std::size_t states_;
    std::vector<double> y_frac_;
    std::vector<double> r_frac_;
    std::vector<double> dir_;  // count x states
};

/// Radii of the nested sample sets used for sup over B(0, M): 1, 2, ..., floor(M), plus M
/// itself when it is not an integer. The union of radius * unit set is nested in M.
std::vector<double> nested_radii(double radius);

}  // namespace jumpbsde
