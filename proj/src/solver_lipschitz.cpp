#include "jumpbsde/solver_lipschitz.hpp"

#include <cmath>
#include <cstdio>

namespace jumpbsde {

namespace {

/// rhs_x = sum_y (u_y - u_x) rate(t, x, y) + source_x, i.e. -du/dt.
void generator_plus(const MarkovModel& model, double t, std::span<const double> u,
                    std::span<const double> source, std::span<double> out) {
    const double m = model.modulation()(t);
    for (std::size_t x = 0; x < u.size(); ++x) {
        double acc = 0.0;
        for (const Edge& e : model.edges(x)) {
            acc += (u[e.to] - u[x]) * e.rate;
        }
        out[x] = m * acc + source[x];
    }
}

void check_grid(const MarkovModel& model, const TimeGrid& grid, std::size_t terminal_size) {
    if (grid.size() < 2) {
        throw std::domain_error("grid needs at least two points");
    }
    if (grid.front() < 0.0 || grid.back() > model.horizon() * (1.0 + 1e-12)) {
        throw std::domain_error("grid lies outside [0, T]");
    }
    if (terminal_size != model.size()) {
        throw std::domain_error("terminal condition size does not match the state space");
    }
}

/// Backward RK4 where the right-hand side is rhs(t, u, out).
template <class Rhs>
ValueField backward_rk4(const TimeGrid& grid, const TerminalCondition& h, Rhs&& rhs,
                        bool throw_on_divergence) {
    const std::size_t k = h.size();
    ValueField u(grid, k, 0.0);
    const std::size_t n = grid.steps();
    auto last = u.row(n);
    for (std::size_t x = 0; x < k; ++x) last[x] = h(x);

    std::vector<double> k1(k), k2(k), k3(k), k4(k), tmp(k);
    for (std::size_t i = n; i-- > 0;) {
        const double t1 = grid[i + 1];
        const double t0 = grid[i];
        const double dt = t1 - t0;
        const double tm = t1 - 0.5 * dt;
        std::span<const double> cur = u.row(i + 1);

        rhs(t1, cur, std::span<double>(k1));
        for (std::size_t x = 0; x < k; ++x) tmp[x] = cur[x] + 0.5 * dt * k1[x];
        rhs(tm, tmp, std::span<double>(k2));
        for (std::size_t x = 0; x < k; ++x) tmp[x] = cur[x] + 0.5 * dt * k2[x];
        rhs(tm, tmp, std::span<double>(k3));
        for (std::size_t x = 0; x < k; ++x) tmp[x] = cur[x] + dt * k3[x];
        rhs(t0, tmp, std::span<double>(k4));

        auto next = u.row(i);
        for (std::size_t x = 0; x < k; ++x) {
            next[x] = cur[x] + dt / 6.0 * (k1[x] + 2.0 * k2[x] + 2.0 * k3[x] + k4[x]);
            if (throw_on_divergence && !std::isfinite(next[x])) {
                throw DivergenceError(i, t0);
            }
        }
    }
    return u;
}

}  // namespace

DivergenceError::DivergenceError(std::size_t grid_index, double time)
    : std::runtime_error("backward integration diverged at grid index " +
                         std::to_string(grid_index) + " (t = " + std::to_string(time) + ")"),
      grid_index_(grid_index),
      time_(time) {}

ValueField solve_linear_fk(const MarkovModel& model, const SourceFn& g, const TerminalCondition& h,
                           const TimeGrid& grid) {
    check_grid(model, grid, h.size());
    std::vector<double> source(model.size());
    return backward_rk4(
        grid, h,
        [&](double t, std::span<const double> u, std::span<double> out) {
            g(t, source);
            generator_plus(model, t, u, source, out);
        },
        false);
}

ValueField solve_linear_fk(const MarkovModel& model,
                           const std::function<double(double, StateIndex)>& g,
                           const TerminalCondition& h, const TimeGrid& grid) {
    return solve_linear_fk(
        model,
        SourceFn([&g](double t, std::span<double> out) {
            for (std::size_t x = 0; x < out.size(); ++x) out[x] = g(t, x);
        }),
        h, grid);
}

ValueField picard_step(const MarkovModel& model, const Driver& driver, const ValueField& u_prev,
                       const TerminalCondition& h, const TimeGrid& grid) {
    if (!(u_prev.grid() == grid) || u_prev.states() != model.size()) {
        throw std::domain_error("picard_step: previous iterate lives on a different grid");
    }
    const std::size_t k = model.size();
    std::vector<double> row(k), scratch(k);
    SourceFn source = [&](double t, std::span<double> out) {
        interpolate_row_cubic(grid, u_prev.values(), k, t, row);
        for (std::size_t x = 0; x < k; ++x) {
            out[x] = evaluate_driver(model, driver, t, x, row, scratch);
        }
    };
    return solve_linear_fk(model, source, h, grid);
}

PicardResult solve_picard(const MarkovModel& model, const Driver& driver,
                          const TerminalCondition& h, const MarginalLaw& law,
                          const PicardOptions& options, const std::optional<ValueField>& initial) {
    if (!driver.global_L) {
        throw std::domain_error("solve_picard needs a globally Lipschitz driver");
    }
    if (!(options.tol > 0.0)) {
        throw std::domain_error("solve_picard: tol must be positive");
    }
    const TimeGrid& grid = law.grid();
    ValueField u = initial ? *initial
                           : solve_linear_fk(
                                 model, SourceFn([](double, std::span<double> out) {
                                     for (double& v : out) v = 0.0;
                                 }),
                                 h, grid);
    if (!(u.grid() == grid)) {
        throw std::domain_error("solve_picard: initial iterate lives on a different grid");
    }
    PicardDiagnostics diag;
    for (std::size_t it = 0; it < options.max_iter; ++it) {
        ValueField next = picard_step(model, driver, u, h, grid);
        const double d = b_distance(model, law, next, u);
        u = std::move(next);
        ++diag.iterates;
        diag.distances.push_back(d);
        if (diag.distances.size() >= 2) {
            const double prev = diag.distances[diag.distances.size() - 2];
            diag.contraction_ratios.push_back(d / prev);
        }
        if (!std::isfinite(d)) break;
        if (d < options.tol) {
            diag.converged = true;
            break;
        }
    }
    return PicardResult{std::move(u), std::move(diag)};
}

PicardResult solve_picard(const MarkovModel& model, const Driver& driver,
                          const TerminalCondition& h, const TimeGrid& grid, StateIndex start,
                          const PicardOptions& options) {
    const MarginalLaw law = marginal_law(model, grid.front(), start, grid);
    return solve_picard(model, driver, h, law, options);
}

ValueField solve_direct(const MarkovModel& model, const Driver& driver, const TerminalCondition& h,
                        const TimeGrid& grid) {
    check_grid(model, grid, h.size());
    const std::size_t k = model.size();
    std::vector<double> source(k), scratch(k);
    return backward_rk4(
        grid, h,
        [&](double t, std::span<const double> u, std::span<double> out) {
            for (std::size_t x = 0; x < k; ++x) {
                source[x] = evaluate_driver(model, driver, t, x, u, scratch);
            }
            generator_plus(model, t, u, source, out);
        },
        true);
}

std::string picard_diagnostics_csv(const PicardDiagnostics& diagnostics) {
    std::string out = "iteration,sq_b_distance,contraction_ratio\n";
    char buf[96];
    for (std::size_t i = 0; i < diagnostics.distances.size(); ++i) {
        if (i == 0) {
            std::snprintf(buf, sizeof buf, "%zu,%.17g,\n", i + 1, diagnostics.distances[i]);
        } else {
            std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i + 1, diagnostics.distances[i],
                          diagnostics.contraction_ratios[i - 1]);
        }
        out += buf;
    }
    return out;
}

}  // namespace jumpbsde
