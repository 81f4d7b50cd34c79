#include "jumpbsde/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "jumpbsde/parallel.hpp"
#include "jumpbsde/rng.hpp"

namespace jumpbsde {

namespace {

struct PathOutcome {
    std::vector<double> residuals;
    double martingale = 0.0;
};

struct MeanStderr {
    double mean;
    double stderr_;
};

MeanStderr mean_stderr(const std::vector<double>& values) {
    CompensatedSum sum;
    for (double v : values) sum.add(v);
    const double n = static_cast<double>(values.size());
    const double mean = sum.value() / n;
    CompensatedSum sq;
    for (double v : values) sq.add((v - mean) * (v - mean));
    const double var = values.size() > 1 ? sq.value() / (n - 1.0) : 0.0;
    return {mean, std::sqrt(var / n)};
}

}  // namespace

ResidualStats verify_pathwise(const MarkovModel& model, const Driver& driver,
                              const TerminalCondition& h, const ValueField& u, double t0,
                              StateIndex x0, const PathwiseOptions& options) {
    const TimeGrid& grid = u.grid();
    const double T = model.horizon();
    const double slack = 1e-12 * std::max(1.0, T);
    if (grid.front() > t0 + slack || grid.back() < T - slack) {
        throw std::domain_error("verify_pathwise: u does not cover [t0, T]");
    }
    if (options.paths == 0 || options.checkpoints == 0) {
        throw std::domain_error("verify_pathwise needs at least one path and one checkpoint");
    }
    const std::size_t k = model.size();
    std::vector<double> checkpoints(options.checkpoints);
    for (std::size_t j = 0; j < options.checkpoints; ++j) {
        checkpoints[j] = t0 + static_cast<double>(j) * (T - t0) /
                                  static_cast<double>(options.checkpoints);
    }

    std::vector<PathOutcome> outcomes(options.paths);
    parallel_for(options.paths, options.threads, [&](std::size_t p) {
        const Trajectory traj = simulate_path(model, t0, x0, derive_seed(options.seed, p));
        std::vector<double> row(k), scratch(k);
        const PathIntegrand drift = [&](double t, StateIndex x) {
            u.interpolate_linear(t, row);
            return evaluate_driver(model, driver, t, x, row, scratch);
        };
        std::vector<double> zrow(k);
        const ZField z{[&](double t, StateIndex from, StateIndex to) {
                           u.interpolate_linear(t, zrow);
                           return zrow[to] - zrow[from];
                       },
                       grid.front(), grid.back()};
        const auto drift_tail = path_tail_integrals(traj, drift, grid, checkpoints);
        const auto jump_tail = compensated_tail_integrals(model, traj, z, grid, checkpoints);
        const double xi = h(traj.terminal_state());

        PathOutcome out;
        out.residuals.resize(checkpoints.size());
        for (std::size_t j = 0; j < checkpoints.size(); ++j) {
            u.interpolate_linear(checkpoints[j], row);
            const double y = row[traj.state_at(checkpoints[j])];
            out.residuals[j] = y - (xi + drift_tail[j] - jump_tail[j]);
        }
        // The first checkpoint is t0, so this is the integral over the whole path.
        out.martingale = jump_tail[0];
        outcomes[p] = std::move(out);
    });

    ResidualStats stats;
    stats.paths = options.paths;
    stats.grid_size = grid.steps();
    stats.checkpoints = checkpoints;
    stats.checkpoint_max_residual.assign(checkpoints.size(), 0.0);
    CompensatedSum abs_sum;
    std::vector<double> martingales(options.paths);
    for (std::size_t p = 0; p < options.paths; ++p) {
        for (std::size_t j = 0; j < checkpoints.size(); ++j) {
            const double r = std::abs(outcomes[p].residuals[j]);
            abs_sum.add(r);
            stats.checkpoint_max_residual[j] = std::max(stats.checkpoint_max_residual[j], r);
            stats.max_abs_residual = std::max(stats.max_abs_residual, r);
        }
        martingales[p] = outcomes[p].martingale;
    }
    stats.mean_abs_residual =
        abs_sum.value() / static_cast<double>(options.paths * checkpoints.size());
    const MeanStderr ms = mean_stderr(martingales);
    stats.martingale_mean = ms.mean;
    stats.martingale_stderr = ms.stderr_;
    return stats;
}

std::vector<ExpectationCheck> expectation_consistency(const MarkovModel& model, const ValueField& u,
                                                      double t0, StateIndex x0,
                                                      const std::vector<double>& times,
                                                      std::size_t paths, std::uint64_t seed,
                                                      unsigned threads) {
    const TimeGrid& grid = u.grid();
    if (std::abs(grid.front() - t0) > 1e-12 * std::max(1.0, std::abs(t0))) {
        throw std::domain_error("expectation_consistency: u must start at t0");
    }
    const MarginalLaw law = marginal_law(model, t0, x0, grid);
    const auto trajs = simulate_paths(model, t0, x0, seed, paths, threads);
    std::vector<ExpectationCheck> out;
    for (double t : times) {
        const std::size_t i = grid.index_of(t);
        std::vector<double> samples(paths);
        for (std::size_t p = 0; p < paths; ++p) samples[p] = u.at(i, trajs[p].state_at(t));
        const MeanStderr ms = mean_stderr(samples);
        double exact = 0.0;
        for (std::size_t x = 0; x < u.states(); ++x) exact += law.prob(i, x) * u.at(i, x);
        out.push_back({t, ms.mean, ms.stderr_, exact,
                       std::abs(ms.mean - exact) <= 3.0 * ms.stderr_});
    }
    return out;
}

}  // namespace jumpbsde
