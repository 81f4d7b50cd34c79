#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "jumpbsde/bsde_core.hpp"

namespace jumpbsde {

struct ResidualStats {
    std::size_t paths = 0;
    std::size_t grid_size = 0;  ///< number of grid intervals N
    double max_abs_residual = 0.0;
    double mean_abs_residual = 0.0;
    double martingale_mean = 0.0;
    double martingale_stderr = 0.0;
    std::vector<double> checkpoints;
    std::vector<double> checkpoint_max_residual;
};

struct PathwiseOptions {
    std::size_t paths = 10000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::size_t checkpoints = 10;
};

/// Along simulated paths from (t0, x0), evaluates
/// R(s) = u(s, X_s) - [h(X_T) + int_s^T f(r, X_r, u, z_u) dr - int_s^T int z_u dq]
/// at equispaced checkpoints s = t0 + j (T - t0) / checkpoints, j = 0..checkpoints-1,
/// with u read by linear interpolation in time. Also reports mean and standard error of
/// the compensated integral of z_u over [t0, T].
ResidualStats verify_pathwise(const MarkovModel& model, const Driver& driver,
                              const TerminalCondition& h, const ValueField& u, double t0,
                              StateIndex x0, const PathwiseOptions& options = {});

struct ExpectationCheck {
    double time;
    double mc_mean;
    double mc_stderr;
    double law_value;
    bool within_3_stderr;
};

/// Monte Carlo mean of u(t, X_t) against sum_x law(t, x) u(t, x) at each time, which must be
/// a grid point of u.
std::vector<ExpectationCheck> expectation_consistency(const MarkovModel& model, const ValueField& u,
                                                      double t0, StateIndex x0,
                                                      const std::vector<double>& times,
                                                      std::size_t paths, std::uint64_t seed,
                                                      unsigned threads = 1);

}  // namespace jumpbsde
