#include "jumpbsde/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "jumpbsde/drivers.hpp"
#include "jumpbsde/parallel.hpp"

namespace jumpbsde {

namespace {

void require_nonnegative(double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
        throw std::domain_error(std::string(name) + " must be finite and nonnegative");
    }
}

}  // namespace

AprioriConstants apriori_constants(double lambda, double T, double E_xi_sq,
                                   std::optional<double> sup_xi_sq) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::domain_error("lambda must be positive");
    }
    require_nonnegative(T, "T");
    require_nonnegative(E_xi_sq, "E|xi|^2");
    AprioriConstants c;
    c.lambda = lambda;
    c.T = T;
    c.E_xi_sq = E_xi_sq;
    const double l2 = lambda * lambda;
    c.C1 = (E_xi_sq + 9.0 * T) * std::exp((1.0 + 3.0 * l2) * T);
    c.C2 = 2.0 * (E_xi_sq + 9.0 * T) + 2.0 * T * (1.0 + 4.0 * l2) * c.C1;
    if (sup_xi_sq) {
        require_nonnegative(*sup_xi_sq, "sup|xi|^2");
        c.sup_xi_sq = sup_xi_sq;
        c.K1 = (*sup_xi_sq + 9.0 * T) * std::exp((9.0 * T + l2 + 2.0 * lambda) * T);
    }
    return c;
}

double terminal_second_moment(const MarginalLaw& law, const TerminalCondition& h) {
    const auto last = law.row(law.grid().steps());
    double e = 0.0;
    for (std::size_t x = 0; x < last.size(); ++x) e += last[x] * h(x) * h(x);
    return e;
}

AprioriConstants apriori_for(const MarginalLaw& law, const Driver& driver,
                             const TerminalCondition& h) {
    const double sup = h.sup_abs();
    return apriori_constants(driver.lambda, law.grid().back() - law.grid().front(),
                             terminal_second_moment(law, h), sup * sup);
}

AprioriReport check_apriori(const MarkovModel& model, const MarginalLaw& law, const ValueField& u,
                            const AprioriConstants& constants) {
    if (!(u.grid() == law.grid())) {
        throw std::domain_error("check_apriori: field and law grids differ");
    }
    const std::map<std::string, double> inputs{{"lambda", constants.lambda},
                                               {"T", constants.T},
                                               {"E_xi_sq", constants.E_xi_sq}};
    double max_ey = 0.0;
    double sup_sq = 0.0;
    for (std::size_t i = 0; i < law.grid().size(); ++i) {
        double ey = 0.0;
        for (std::size_t x = 0; x < u.states(); ++x) {
            const double v = u.at(i, x);
            ey += law.prob(i, x) * v * v;
            sup_sq = std::max(sup_sq, v * v);
        }
        max_ey = std::max(max_ey, ey);
    }
    const double z_int = b_norm_parts(model, law, u).z_part;

    AprioriReport report;
    report.checks.push_back({"C1", inputs, constants.C1, max_ey, max_ey <= constants.C1});
    report.checks.push_back({"C2", inputs, constants.C2, z_int, z_int <= constants.C2});
    if (constants.K1) {
        auto k_inputs = inputs;
        k_inputs["sup_xi_sq"] = constants.sup_xi_sq.value_or(0.0);
        report.checks.push_back({"K1", k_inputs, *constants.K1, sup_sq, sup_sq <= *constants.K1});
    }
    report.pass = std::all_of(report.checks.begin(), report.checks.end(),
                              [](const BoundCheck& c) { return c.pass; });
    return report;
}

double phi_seminorm(const MarkovModel& model, const MarginalLaw& law, const Driver& f1,
                    const Driver& f2, double M, std::size_t ball_samples) {
    const std::vector<double> radii = nested_radii(M);
    const std::size_t k = model.size();
    const UnitBallSet unit(ball_samples, k);
    const auto weights = law.grid().trapezoid_weights();
    std::vector<double> z(k);
    CompensatedSum total;
    for (std::size_t i = 0; i < law.grid().size(); ++i) {
        const double t = law.grid()[i];
        double expectation = 0.0;
        for (StateIndex x = 0; x < k; ++x) {
            const double p = law.prob(i, x);
            if (p == 0.0) continue;
            double sup = 0.0;
            for (double r : radii) {
                for (std::size_t j = 0; j < unit.size(); ++j) {
                    double norm = 0.0;
                    const double y = unit.materialize(model, t, x, r, j, z, norm);
                    const ZArg arg{z, norm};
                    const double d = f1(t, x, y, arg) - f2(t, x, y, arg);
                    sup = std::max(sup, d * d);
                }
            }
            expectation += p * sup;
        }
        total.add(weights[i] * expectation);
    }
    return std::sqrt(total.value());
}

double lemma2_constant(double lambda, double alpha, double T, double C1, double C2) {
    require_nonnegative(lambda, "lambda");
    require_nonnegative(T, "T");
    require_nonnegative(C1, "C1");
    require_nonnegative(C2, "C2");
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw std::domain_error("alpha must lie in (0, 1]");
    }
    const double mass = (C1 + C2) * (T + 1.0);
    return 6.0 * lambda * lambda *
           (2.0 * T + 2.0 * std::pow(C1 * T, alpha) * std::pow(mass, 1.0 - alpha) +
            2.0 * std::pow(C2, alpha / 2.0) * std::pow(mass, 1.0 - alpha / 2.0));
}

Lemma2Bound lemma2_bound(const Lemma2Inputs& in) {
    if (!(in.M > 1.0)) {
        throw std::domain_error("lemma2_bound needs M > 1");
    }
    require_nonnegative(in.C, "C");
    require_nonnegative(in.E_xi_diff_sq, "E|xi_bar|^2");
    require_nonnegative(in.phi1, "phi1");
    require_nonnegative(in.phi2, "phi2");
    require_nonnegative(in.L_M, "L_M");
    require_nonnegative(in.T, "T");
    require_nonnegative(in.s, "s");
    if (!(in.alpha > 0.0 && in.alpha <= 1.0)) {
        throw std::domain_error("alpha must lie in (0, 1]");
    }
    const double l2 = in.L_M * in.L_M;
    const double bracket = in.E_xi_diff_sq + in.phi1 * in.phi1 + in.phi2 * in.phi2 +
                           in.C / ((1.0 + 2.0 * l2) * std::pow(in.M, 2.0 * (1.0 - in.alpha)));
    const double y = bracket * std::exp((4.0 + 4.0 * l2) * (in.T - in.s));
    return Lemma2Bound{y, in.C, in.E_xi_diff_sq};
}

double lemma2_b_bound(Lemma2Inputs in, const TimeGrid& grid) {
    const auto weights = grid.trapezoid_weights();
    double integral = 0.0;
    Lemma2Bound last{0.0, in.C, in.E_xi_diff_sq};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        in.s = std::min(grid[i], in.T);
        last = lemma2_bound(in);
        integral += weights[i] * last.y_bound;
    }
    return integral + last.z_bound(std::sqrt(integral));
}

std::vector<Perturbation> additive_perturbations(const Driver& driver, const TerminalCondition& h,
                                                 const std::vector<double>& indices,
                                                 double scale) {
    std::vector<Perturbation> out;
    for (double n : indices) {
        if (!(n > 0.0)) {
            throw std::domain_error("perturbation index must be positive");
        }
        std::vector<double> shifted_h(h.values().begin(), h.values().end());
        for (double& v : shifted_h) v += scale / n;
        out.push_back({n, drivers::shifted(driver, scale / n), TerminalCondition(shifted_h)});
    }
    return out;
}

StabilityReport stability_experiment(const MarkovModel& model, const Driver& driver,
                                     const TerminalCondition& h, const MarginalLaw& law,
                                     const std::vector<Perturbation>& perturbations,
                                     const StabilityOptions& options) {
    const TruncationSchedule schedule{options.radii, 0.9 * (1.0 - driver.alpha) / 4.0,
                                      driver.alpha};
    LocalSolveOptions local = options.local;
    local.lipschitz_samples = 0;
    const ValueField base = solve_local(model, driver, h, law, schedule, local).u;
    const AprioriConstants base_c = apriori_for(law, driver, h);

    const TimeGrid& grid = law.grid();
    const double T = grid.back() - grid.front();
    // Phi is a sup over balls; a coarse time grid keeps the sampling affordable.
    const MarginalLaw coarse =
        marginal_law(model, grid.front(), law.start_state(),
                     TimeGrid::uniform(grid.front(), grid.back(), 20));

    StabilityReport report;
    report.runs.resize(perturbations.size());
    parallel_for(perturbations.size(), options.threads, [&](std::size_t r) {
        const Perturbation& p = perturbations[r];
        try {
            const ValueField u = solve_local(model, p.driver, p.h, law, schedule, local).u;
            StabilityRun run;
            run.index = p.index;
            run.sq_b_distance = b_distance(model, law, u, base);

            const AprioriConstants pc = apriori_for(law, p.driver, p.h);
            const double lambda = std::max(driver.lambda, p.driver.lambda);
            run.lemma2_C = lemma2_constant(lambda, driver.alpha, T, std::max(base_c.C1, pc.C1),
                                           std::max(base_c.C2, pc.C2));
            const auto last = law.row(grid.steps());
            double e = 0.0;
            for (std::size_t x = 0; x < last.size(); ++x) {
                const double d = p.h(x) - h(x);
                e += last[x] * d * d;
            }
            run.E_xi_diff_sq = e;

            run.predicted_bound = std::numeric_limits<double>::infinity();
            for (double M : options.bound_radii) {
                const double phi = phi_seminorm(model, coarse, p.driver, driver, M,
                                                options.ball_samples);
                Lemma2Inputs in;
                in.C = run.lemma2_C;
                in.E_xi_diff_sq = e;
                in.phi1 = phi;
                in.phi2 = 0.0;
                in.L_M = driver.lipschitz_profile ? driver.lipschitz_profile(M) : 0.0;
                in.M = M;
                in.alpha = driver.alpha;
                in.T = grid.back();
                const double bound = lemma2_b_bound(in, grid);
                if (bound < run.predicted_bound) {
                    run.predicted_bound = bound;
                    run.phi = phi;
                    run.M = M;
                }
            }
            run.dominated = run.sq_b_distance <= run.predicted_bound;
            report.runs[r] = run;
        } catch (const std::exception& ex) {
            throw std::runtime_error("stability run " + std::to_string(r) + " (index " +
                                     std::to_string(p.index) + "): " + ex.what());
        }
    });

    report.monotone = true;
    report.strictly_decreasing = true;
    for (std::size_t r = 1; r < report.runs.size(); ++r) {
        const double prev = report.runs[r - 1].sq_b_distance;
        const double cur = report.runs[r].sq_b_distance;
        if (!(cur <= prev)) report.monotone = false;
        if (!(cur < prev)) report.strictly_decreasing = false;
    }
    report.final_below_tol =
        !report.runs.empty() && report.runs.back().sq_b_distance < options.tol;
    report.dominated = std::all_of(report.runs.begin(), report.runs.end(),
                                   [](const StabilityRun& r) { return r.dominated; });
    report.pass = report.monotone && report.final_below_tol && report.dominated;
    return report;
}

}  // namespace jumpbsde
