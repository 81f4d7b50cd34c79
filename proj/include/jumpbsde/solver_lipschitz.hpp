#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "jumpbsde/bsde_core.hpp"

namespace jumpbsde {

/// Source term g(t, .) for a linear backward sweep; writes one value per state.
using SourceFn = std::function<void(double t, std::span<double> out)>;

/// Raised by solve_direct when the integration produces NaN or overflow.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::size_t grid_index, double time);
    std::size_t grid_index() const { return grid_index_; }
    double time() const { return time_; }

private:
    std::size_t grid_index_;
    double time_;
};

/// du/dt = -sum_y [u(t,y) - u(t,x)] rate(t,x,y) - g(t,x), u(grid.back(), .) = h,
/// classical RK4 backward over the grid.
ValueField solve_linear_fk(const MarkovModel& model, const SourceFn& g, const TerminalCondition& h,
                           const TimeGrid& grid);

/// Scalar form g(t, x).
ValueField solve_linear_fk(const MarkovModel& model,
                           const std::function<double(double, StateIndex)>& g,
                           const TerminalCondition& h, const TimeGrid& grid);

/// One Picard map: the linear solve with frozen source f(t, x, u_prev, z_{u_prev}).
/// Between grid points the frozen iterate is read through cubic interpolation in time.
ValueField picard_step(const MarkovModel& model, const Driver& driver, const ValueField& u_prev,
                       const TerminalCondition& h, const TimeGrid& grid);

struct PicardOptions {
    double tol = 1e-12;  ///< squared B-distance between successive iterates
    std::size_t max_iter = 200;
};

struct PicardDiagnostics {
    std::size_t iterates = 0;
    std::vector<double> distances;
    bool converged = false;
    std::vector<double> contraction_ratios;
};

struct PicardResult {
    ValueField u;
    PicardDiagnostics diagnostics;
};

/// Picard iteration from the zero-driver solve (or `initial`). The law fixes the grid
/// and the measure used by the B-distance. Non-convergence is reported, not thrown.
PicardResult solve_picard(const MarkovModel& model, const Driver& driver,
                          const TerminalCondition& h, const MarginalLaw& law,
                          const PicardOptions& options = {},
                          const std::optional<ValueField>& initial = std::nullopt);

/// Same with the law of X started at (grid.front(), start).
PicardResult solve_picard(const MarkovModel& model, const Driver& driver,
                          const TerminalCondition& h, const TimeGrid& grid, StateIndex start,
                          const PicardOptions& options = {});

/// RK4 on the nonlinear backward system. Throws DivergenceError on NaN/overflow.
ValueField solve_direct(const MarkovModel& model, const Driver& driver, const TerminalCondition& h,
                        const TimeGrid& grid);

/// Rows `iteration, sq_b_distance, contraction_ratio`.
std::string picard_diagnostics_csv(const PicardDiagnostics& diagnostics);

}  // namespace jumpbsde
