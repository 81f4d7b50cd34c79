#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "jumpbsde/solver_lipschitz.hpp"

namespace jumpbsde {

/// f_n(t, x, y, z) = f(t, x, rho_n(y), rho_n(z)) with rho_n the radial projection onto the
/// closed ball of radius n (z measured in the caller-supplied norm). global_L is set to
/// the declared profile at n.
Driver truncate_driver(const Driver& driver, double n);

/// Radii n_1 < n_2 < ..., subinterval length delta < (1 - alpha) / 4.
struct TruncationSchedule {
    std::vector<double> radii;
    double delta;
    double alpha;

    /// delta defaults to 0.9 (1 - alpha) / 4.
    static TruncationSchedule with_default_delta(std::vector<double> radii, double alpha);
    /// Throws std::domain_error when the invariants fail.
    void validate() const;
};

struct LipschitzEstimate {
    double radius;
    double estimate;      ///< max sampled difference quotient in B(0, radius)
    double bound;         ///< base L + sqrt(ln radius)
    double declared;      ///< driver.lipschitz_profile(radius)
    std::size_t samples;
    bool within_bound;
    bool declared_dominates;
};

/// Estimates L_M over sampled pairs in B(0, M) for each radius (y-only, z-only and
/// joint perturbations with log-uniform sizes), evaluated on the model at t = 0.
std::vector<LipschitzEstimate> lipschitz_profile_check(const MarkovModel& model,
                                                       const Driver& driver,
                                                       const std::vector<double>& radii,
                                                       std::size_t samples_per_ball,
                                                       std::uint64_t seed = 1);

/// Boundary grid indices 0 = i_0 < i_1 < ... < i_m = N with t_{i_{k+1}} - t_{i_k} <= delta,
/// built greedily from the horizon backward.
std::vector<std::size_t> subdivide(const TimeGrid& grid, double delta);

/// Raised when an inner Picard solve fails to converge.
class CascadeError : public std::runtime_error {
public:
    CascadeError(double radius, std::size_t subinterval);
    double radius() const { return radius_; }
    std::size_t subinterval() const { return subinterval_; }

private:
    double radius_;
    std::size_t subinterval_;
};

struct LocalSolveOptions {
    PicardOptions picard{1e-24, 200};
    double cascade_tol = 1e-6;  ///< bound on the last squared Cauchy distance
    std::size_t lipschitz_samples = 1000;
    std::uint64_t seed = 1;
};

struct CascadeDiagnostics {
    std::vector<ValueField> fields;           ///< one per radius, full horizon
    std::vector<double> cauchy_distances;     ///< squared B-distance, radius k vs k-1
    std::vector<LipschitzEstimate> lipschitz_bound_checks;
    /// picard_iterations[k][j]: iterations for radius k on subinterval j (0 = earliest).
    std::vector<std::vector<std::size_t>> picard_iterations;
    std::vector<std::size_t> boundaries;
    bool decreasing = false;
    bool converged = false;
};

struct LocalResult {
    ValueField u;
    CascadeDiagnostics diagnostics;
};

/// Backward over subintervals, radii inner: each truncated problem is solved by Picard on
/// its subinterval with terminal data from the same radius on the later subinterval,
/// warm-started from the previous radius.
LocalResult solve_local(const MarkovModel& model, const Driver& driver, const TerminalCondition& h,
                        const MarginalLaw& law, const TruncationSchedule& schedule,
                        const LocalSolveOptions& options = {});

/// Rows `radius, subinterval, picard_iters, sq_b_distance_to_previous_radius, L_estimate,
/// L_bound`.
std::string cascade_diagnostics_csv(const TruncationSchedule& schedule,
                                    const CascadeDiagnostics& diagnostics);

}  // namespace jumpbsde
