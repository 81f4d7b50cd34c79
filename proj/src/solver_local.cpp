#include "jumpbsde/solver_local.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "jumpbsde/rng.hpp"

namespace jumpbsde {

namespace {

constexpr double kInside = 1.0 - 1e-12;

/// Random direction over the states with z(x) = 0, scaled to weighted norm `radius`.
double random_field(const MarkovModel& model, double t, StateIndex x, double radius,
                    PathRng& rng, std::span<double> out) {
    for (double& v : out) v = 2.0 * rng.uniform() - 1.0;
    out[x] = 0.0;
    const double raw = z_norm(model, t, x, out);
    if (raw == 0.0) {
        for (double& v : out) v = 0.0;
        return 0.0;
    }
    for (double& v : out) v *= radius / raw;
    return z_norm(model, t, x, out);
}

}  // namespace

Driver truncate_driver(const Driver& driver, double n) {
    if (!(n >= 1.0)) {
        throw std::domain_error("truncation radius must be at least 1");
    }
    Driver d = driver;
    d.name = driver.name + "_trunc";
    d.f = [inner = driver.f, n](double t, StateIndex x, double y, ZArg z) {
        const double yy = std::abs(y) > n ? y * (n / std::abs(y)) : y;
        if (z.norm <= n) {
            return inner(t, x, yy, z);
        }
        std::vector<double> scaled(z.values.begin(), z.values.end());
        const double s = n / z.norm;
        for (double& v : scaled) v *= s;
        return inner(t, x, yy, ZArg{scaled, n});
    };
    d.global_L = driver.lipschitz_profile ? driver.lipschitz_profile(n) : 0.0;
    d.lipschitz_profile = [profile = driver.lipschitz_profile, n](double m) {
        return profile ? profile(std::min(m, n)) : 0.0;
    };
    return d;
}

TruncationSchedule TruncationSchedule::with_default_delta(std::vector<double> radii, double alpha) {
    TruncationSchedule s{std::move(radii), 0.9 * (1.0 - alpha) / 4.0, alpha};
    s.validate();
    return s;
}

void TruncationSchedule::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::domain_error("truncation schedule needs alpha in (0, 1)");
    }
    if (!(delta > 0.0 && delta < (1.0 - alpha) / 4.0)) {
        throw std::domain_error("subinterval length delta must lie in (0, (1 - alpha) / 4)");
    }
    if (radii.empty()) {
        throw std::domain_error("truncation schedule has no radii");
    }
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] >= 1.0) || !std::isfinite(radii[i])) {
            throw std::domain_error("truncation radii must be finite and at least 1");
        }
        if (i > 0 && !(radii[i] > radii[i - 1])) {
            throw std::domain_error("truncation radii must be strictly increasing");
        }
    }
}

std::vector<LipschitzEstimate> lipschitz_profile_check(const MarkovModel& model,
                                                       const Driver& driver,
                                                       const std::vector<double>& radii,
                                                       std::size_t samples_per_ball,
                                                       std::uint64_t seed) {
    if (radii.empty()) {
        throw std::domain_error("lipschitz_profile_check needs at least one radius");
    }
    const std::size_t k = model.size();
    const double t = 0.0;
    std::vector<double> z1(k), z2(k), dz(k), dir(k);
    std::vector<LipschitzEstimate> out;
    for (std::size_t r = 0; r < radii.size(); ++r) {
        const double radius = radii[r];
        const double limit = radius * kInside;
        PathRng rng(derive_seed(seed, r));
        double best = 0.0;
        std::size_t used = 0;
        for (std::size_t s = 0; s < samples_per_ball; ++s) {
            const StateIndex x = static_cast<StateIndex>(rng.uniform() * static_cast<double>(k));
            const int mode = static_cast<int>(s % 3);  // 0: y only, 1: z only, 2: both
            const double y1 = (2.0 * rng.uniform() - 1.0) * limit;
            double n1 = random_field(model, t, x, rng.uniform() * limit, rng, z1);
            const double eps = radius * std::pow(10.0, -6.0 + 6.0 * rng.uniform());

            double y2 = y1;
            if (mode != 1) {
                y2 = rng.uniform() < 0.5 ? y1 - eps : y1 + eps;
                y2 = std::clamp(y2, -limit, limit);
            }
            std::copy(z1.begin(), z1.end(), z2.begin());
            double n2 = n1;
            if (mode != 0) {
                random_field(model, t, x, eps, rng, dir);
                for (std::size_t i = 0; i < k; ++i) z2[i] += dir[i];
                n2 = z_norm(model, t, x, z2);
                if (n2 > limit) {
                    for (double& v : z2) v *= limit / n2;
                    n2 = z_norm(model, t, x, z2);
                }
            }
            for (std::size_t i = 0; i < k; ++i) dz[i] = z1[i] - z2[i];
            const double denom = std::abs(y1 - y2) + z_norm(model, t, x, dz);
            if (!(denom > 0.0)) continue;
            const double f1 = driver(t, x, y1, ZArg{z1, n1});
            const double f2 = driver(t, x, y2, ZArg{z2, n2});
            best = std::max(best, std::abs(f1 - f2) / denom);
            ++used;
        }
        LipschitzEstimate e;
        e.radius = radius;
        e.estimate = best;
        e.bound = driver.lipschitz_base + std::sqrt(std::log(radius));
        e.declared = driver.lipschitz_profile ? driver.lipschitz_profile(radius) : 0.0;
        e.samples = used;
        e.within_bound = best <= e.bound;
        e.declared_dominates = best <= e.declared * (1.0 + 1e-12);
        out.push_back(e);
    }
    return out;
}

std::vector<std::size_t> subdivide(const TimeGrid& grid, double delta) {
    if (!(delta > 0.0)) {
        throw std::domain_error("subdivide: delta must be positive");
    }
    std::vector<std::size_t> cuts{grid.steps()};
    std::size_t end = grid.steps();
    while (end > 0) {
        std::size_t j = end;
        while (j > 0 && grid[end] - grid[j - 1] <= delta * (1.0 + 1e-12)) --j;
        if (j == end) {
            throw std::domain_error("subdivide: a grid step exceeds delta");
        }
        cuts.push_back(j);
        end = j;
    }
    std::reverse(cuts.begin(), cuts.end());
    return cuts;
}

CascadeError::CascadeError(double radius, std::size_t subinterval)
    : std::runtime_error("Picard iteration did not converge for radius " +
                         std::to_string(radius) + " on subinterval " +
                         std::to_string(subinterval)),
      radius_(radius),
      subinterval_(subinterval) {}

LocalResult solve_local(const MarkovModel& model, const Driver& driver, const TerminalCondition& h,
                        const MarginalLaw& law, const TruncationSchedule& schedule,
                        const LocalSolveOptions& options) {
    schedule.validate();
    if (std::abs(schedule.alpha - driver.alpha) > 1e-15) {
        throw std::domain_error("schedule alpha differs from the driver's growth exponent");
    }
    if (h.size() != model.size()) {
        throw std::domain_error("terminal condition size does not match the state space");
    }
    const TimeGrid& grid = law.grid();
    const std::size_t k = model.size();
    const std::size_t nr = schedule.radii.size();

    CascadeDiagnostics diag;
    diag.boundaries = subdivide(grid, schedule.delta);
    const std::size_t pieces = diag.boundaries.size() - 1;
    diag.picard_iterations.assign(nr, std::vector<std::size_t>(pieces, 0));

    std::vector<Driver> truncated;
    truncated.reserve(nr);
    for (double n : schedule.radii) truncated.push_back(truncate_driver(driver, n));

    std::vector<std::vector<double>> full(nr, std::vector<double>(grid.size() * k, 0.0));
    std::vector<std::vector<double>> terminal(nr, std::vector<double>(h.values().begin(),
                                                                      h.values().end()));
    for (std::size_t j = pieces; j-- > 0;) {
        const std::size_t a = diag.boundaries[j];
        const std::size_t b = diag.boundaries[j + 1];
        const MarginalLaw sub = law.slice(a, b);
        for (std::size_t r = 0; r < nr; ++r) {
            std::optional<ValueField> warm;
            if (r > 0) {
                std::vector<double> prev(full[r - 1].begin() + static_cast<std::ptrdiff_t>(a * k),
                                         full[r - 1].begin() +
                                             static_cast<std::ptrdiff_t>((b + 1) * k));
                warm.emplace(sub.grid(), k, std::move(prev));
            }
            PicardResult res = solve_picard(model, truncated[r], TerminalCondition(terminal[r]),
                                            sub, options.picard, warm);
            diag.picard_iterations[r][j] = res.diagnostics.iterates;
            if (!res.diagnostics.converged) {
                throw CascadeError(schedule.radii[r], j);
            }
            const auto vals = res.u.values();
            std::copy(vals.begin(), vals.end(),
                      full[r].begin() + static_cast<std::ptrdiff_t>(a * k));
            terminal[r].assign(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(k));
        }
    }

    for (std::size_t r = 0; r < nr; ++r) {
        diag.fields.emplace_back(grid, k, std::move(full[r]));
    }
    for (std::size_t r = 1; r < nr; ++r) {
        diag.cauchy_distances.push_back(b_distance(model, law, diag.fields[r], diag.fields[r - 1]));
    }
    diag.decreasing = true;
    for (std::size_t i = 1; i < diag.cauchy_distances.size(); ++i) {
        if (!(diag.cauchy_distances[i] < diag.cauchy_distances[i - 1])) diag.decreasing = false;
    }
    diag.converged = diag.decreasing && !diag.cauchy_distances.empty() &&
                     diag.cauchy_distances.back() < options.cascade_tol;
    if (options.lipschitz_samples > 0) {
        diag.lipschitz_bound_checks = lipschitz_profile_check(model, driver, schedule.radii,
                                                              options.lipschitz_samples,
                                                              options.seed);
    }
    ValueField u = diag.fields.back();
    return LocalResult{std::move(u), std::move(diag)};
}

std::string cascade_diagnostics_csv(const TruncationSchedule& schedule,
                                    const CascadeDiagnostics& diagnostics) {
    std::string out =
        "radius,subinterval,picard_iters,sq_b_distance_to_previous_radius,L_estimate,L_bound\n";
    char buf[256];
    const std::size_t solved = std::min(schedule.radii.size(), diagnostics.picard_iterations.size());
    for (std::size_t r = 0; r < solved; ++r) {
        for (std::size_t j = 0; j < diagnostics.picard_iterations[r].size(); ++j) {
            const double dist = r == 0 || r > diagnostics.cauchy_distances.size()
                                    ? 0.0
                                    : diagnostics.cauchy_distances[r - 1];
            double est = 0.0;
            double bound = 0.0;
            if (r < diagnostics.lipschitz_bound_checks.size()) {
                est = diagnostics.lipschitz_bound_checks[r].estimate;
                bound = diagnostics.lipschitz_bound_checks[r].bound;
            }
            std::snprintf(buf, sizeof buf, "%.17g,%zu,%zu,%.17g,%.17g,%.17g\n",
                          schedule.radii[r], j, diagnostics.picard_iterations[r][j], dist, est,
                          bound);
            out += buf;
        }
    }
    return out;
}

}  // namespace jumpbsde
