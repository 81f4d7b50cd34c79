#include "jumpbsde/finance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace jumpbsde {

VolatilityFn MarketSpec::constant_sigma(double s) {
    return [s](double, StateIndex, StateIndex) { return s; };
}

void validate_market(const MarketSpec& spec, const TimeGrid& grid) {
    if (!(spec.sigma_min > 0.0) || !(spec.sigma_max >= spec.sigma_min) ||
        !std::isfinite(spec.sigma_max)) {
        throw ConfigError("volatility bounds must satisfy 0 < sigma_min <= sigma_max < inf");
    }
    if (!spec.sigma || !spec.g.f) {
        throw ConfigError("market needs a volatility and a generator");
    }
    if (spec.payoff.size() != spec.model.size()) {
        throw ConfigError("payoff size does not match the state space");
    }
    for (std::size_t x = 0; x < spec.payoff.size(); ++x) {
        if (spec.payoff(x) < 0.0) {
            throw ConfigError("payoff must be nonnegative (state " + spec.model.states()[x] + ")");
        }
    }
    for (double t : grid.points()) {
        for (StateIndex x = 0; x < spec.model.size(); ++x) {
            for (const Edge& e : spec.model.edges(x)) {
                const double s = std::abs(spec.sigma(t, x, e.to));
                if (!(s >= spec.sigma_min && s <= spec.sigma_max)) {
                    throw ConfigError("volatility leaves [sigma_min, sigma_max] at t = " +
                                      std::to_string(t));
                }
            }
        }
    }
}

Driver induced_driver(const MarketSpec& spec) {
    const double inv = 1.0 / spec.sigma_min;
    const double scale = std::max(1.0, inv);
    Driver f = spec.g;
    f.name = spec.g.name + "_induced";
    f.f = [g = spec.g.f, sigma = spec.sigma, model = spec.model](double t, StateIndex x, double y,
                                                                  ZArg z) {
        std::vector<double> pi(z.values.size(), 0.0);
        for (std::size_t k = 0; k < pi.size(); ++k) {
            if (k != x && z.values[k] != 0.0) pi[k] = z.values[k] / sigma(t, x, k);
        }
        const double norm = z_norm(model, t, x, pi);
        return g(t, x, y, ZArg{pi, norm});
    };
    f.lambda = spec.g.lambda * std::max(1.0, std::pow(inv, spec.g.alpha));
    if (spec.g.lipschitz_profile) {
        f.lipschitz_profile = [profile = spec.g.lipschitz_profile, scale](double m) {
            return scale * profile(scale * m);
        };
    }
    if (spec.g.global_L) f.global_L = scale * *spec.g.global_L;
    f.lipschitz_base = scale * spec.g.lipschitz_base;
    return f;
}

PricingResult price_claim(const MarketSpec& spec, const TimeGrid& grid,
                          const PricingOptions& options) {
    validate_market(spec, grid);
    const Driver f = induced_driver(spec);
    const MarginalLaw law = marginal_law(spec.model, grid.front(), options.start_state, grid);

    std::optional<ValueField> u;
    if (options.solver == SolverChoice::lipschitz) {
        if (!f.global_L) {
            throw ConfigError("lipschitz solver needs a globally Lipschitz generator");
        }
        PicardResult r = solve_picard(spec.model, f, spec.payoff, law, options.picard);
        if (!r.diagnostics.converged) {
            throw ConfigError("Picard iteration did not converge for the pricing problem");
        }
        u = std::move(r.u);
    } else {
        if (!(f.alpha < 1.0)) {
            throw ConfigError("local solver needs sublinear growth (alpha < 1)");
        }
        const TruncationSchedule schedule =
            TruncationSchedule::with_default_delta(options.radii, f.alpha);
        u = solve_local(spec.model, f, spec.payoff, law, schedule, options.local).u;
    }

    const std::size_t k = spec.model.size();
    PricingResult result{*u, std::vector<double>(grid.size() * k * k, 0.0), 0.0, std::nullopt,
                         0.0};
    result.feasibility = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto row = result.price.row(i);
        for (StateIndex x = 0; x < k; ++x) {
            result.feasibility = std::min(result.feasibility, row[x]);
            result.sup_u_sq = std::max(result.sup_u_sq, row[x] * row[x]);
            for (StateIndex y = 0; y < k; ++y) {
                if (y == x) continue;
                result.strategy[(i * k + x) * k + y] = (row[y] - row[x]) / spec.sigma(grid[i], x, y);
            }
        }
    }
    result.K1 = apriori_for(law, f, spec.payoff).K1;
    return result;
}

FeasibilityReport feasibility_check(const MarketSpec& spec, const PricingResult& result) {
    const TimeGrid& grid = result.price.grid();
    const std::size_t k = spec.model.size();
    FeasibilityReport report;

    double g_min = std::numeric_limits<double>::infinity();
    const std::vector<double> zero(k, 0.0);
    for (double t : grid.points()) {
        for (StateIndex x = 0; x < k; ++x) {
            g_min = std::min(g_min, spec.g(t, x, 0.0, ZArg{zero, 0.0}));
        }
    }
    double h_min = std::numeric_limits<double>::infinity();
    for (double v : spec.payoff.values()) h_min = std::min(h_min, v);

    const bool a = g_min >= 0.0;
    const bool b = h_min >= 0.0;
    const bool c = result.feasibility >= -1e-9;
    report.sufficient_condition = a && b;
    report.rows.push_back({"generator_at_zero_min", g_min + 0.0, a});  // no -0 in reports
    report.rows.push_back({"payoff_min", h_min, b});
    report.rows.push_back({"price_min", result.feasibility, c || !report.sufficient_condition});
    bool d = true;
    if (result.K1) {
        d = result.sup_u_sq <= *result.K1;
        report.rows.push_back({"sup_price_sq_vs_K1", result.sup_u_sq, d});
    }
    report.pass = (!report.sufficient_condition || c) && d;
    return report;
}

std::string pricing_csv(const MarketSpec& spec, const PricingResult& result) {
    const TimeGrid& grid = result.price.grid();
    const std::size_t k = spec.model.size();
    std::string out = "time,state,price,min_strategy,max_strategy\n";
    char buf[192];
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (StateIndex x = 0; x < k; ++x) {
            double lo = 0.0;
            double hi = 0.0;
            bool any = false;
            for (StateIndex y = 0; y < k; ++y) {
                if (y == x) continue;
                const double p = result.pi(i, x, y);
                lo = any ? std::min(lo, p) : p;
                hi = any ? std::max(hi, p) : p;
                any = true;
            }
            std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g,%.17g,%.17g\n", grid[i],
                          spec.model.states()[x].c_str(), result.price.at(i, x), lo, hi);
            out += buf;
        }
    }
    return out;
}

}  // namespace jumpbsde
