#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "jumpbsde/estimates.hpp"
#include "jumpbsde/finance.hpp"
#include "jumpbsde/montecarlo.hpp"
#include "jumpbsde/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace jumpbsde;
using namespace jumpbsde::cli;

namespace {

constexpr int kPass = 0;
constexpr int kConfig = 1;
constexpr int kCheckFail = 2;
constexpr int kUsage = 64;

struct Context {
    ExperimentConfig config;
    std::string fp;
    fs::path out;
    MarkovModel model;
    Driver driver;
    TerminalCondition h;
    TimeGrid grid;
    StateIndex start;
};

void write_csv(const Context& ctx, const std::string& name, const std::string& body) {
    write_atomic(ctx.out / name, with_fingerprint(ctx.fp, body));
}

void write_json(const Context& ctx, const std::string& name, json body) {
    body["config_fingerprint"] = ctx.fp;
    write_atomic(ctx.out / name, body.dump(2) + "\n");
}

json apriori_json(const AprioriReport& report) {
    json checks = json::array();
    for (const BoundCheck& c : report.checks) {
        checks.push_back({{"bound_name", c.bound_name},
                          {"formula_inputs", c.formula_inputs},
                          {"bound_value", c.bound_value},
                          {"measured_value", c.measured_value},
                          {"pass", c.pass}});
    }
    return {{"checks", checks}, {"pass", report.pass}};
}

struct Solved {
    ValueField u;
    std::string diagnostics_csv;
    json summary;
    bool converged;
};

Solved solve(const Context& ctx, const MarginalLaw& law) {
    const ExperimentConfig& c = ctx.config;
    if (c.solver == "lipschitz") {
        PicardResult r = solve_picard(ctx.model, ctx.driver, ctx.h, law,
                                      PicardOptions{c.picard_tol, c.max_iter});
        json s{{"solver", "lipschitz"},
               {"iterates", r.diagnostics.iterates},
               {"converged", r.diagnostics.converged},
               {"distances", r.diagnostics.distances}};
        return {std::move(r.u), picard_diagnostics_csv(r.diagnostics), s, r.diagnostics.converged};
    }
    const double delta = c.delta.value_or(0.9 * (1.0 - ctx.driver.alpha) / 4.0);
    const TruncationSchedule schedule{c.radii, delta, ctx.driver.alpha};
    LocalSolveOptions opts;
    opts.picard = PicardOptions{std::min(c.picard_tol, 1e-24), c.max_iter};
    opts.cascade_tol = c.cascade_tol;
    opts.seed = c.seed;
    LocalResult r = solve_local(ctx.model, ctx.driver, ctx.h, law, schedule, opts);
    json checks = json::array();
    for (const LipschitzEstimate& e : r.diagnostics.lipschitz_bound_checks) {
        checks.push_back({{"radius", e.radius},
                          {"estimate", e.estimate},
                          {"bound", e.bound},
                          {"declared", e.declared},
                          {"within_bound", e.within_bound}});
    }
    json s{{"solver", "local"},
           {"delta", delta},
           {"radii", c.radii},
           {"cauchy_distances", r.diagnostics.cauchy_distances},
           {"decreasing", r.diagnostics.decreasing},
           {"converged", r.diagnostics.converged},
           {"lipschitz_checks", checks}};
    return {std::move(r.u), cascade_diagnostics_csv(schedule, r.diagnostics), s,
            r.diagnostics.converged};
}

int cmd_solve(const Context& ctx) {
    const MarginalLaw law = marginal_law(ctx.model, ctx.grid.front(), ctx.start, ctx.grid);
    Solved s = solve(ctx, law);
    const AprioriReport apriori =
        check_apriori(ctx.model, law, s.u, apriori_for(law, ctx.driver, ctx.h));
    write_csv(ctx, "value.csv", value_field_csv(ctx.model, s.u));
    write_csv(ctx, "diagnostics.csv", s.diagnostics_csv);
    json body = s.summary;
    body["command"] = "solve";
    body["apriori"] = apriori_json(apriori);
    write_json(ctx, "solve.json", body);
    return s.converged && apriori.pass ? kPass : kCheckFail;
}

int cmd_simulate(const Context& ctx) {
    const auto paths = simulate_paths(ctx.model, ctx.grid.front(), ctx.start, ctx.config.seed,
                                      ctx.config.paths, ctx.config.threads);
    std::size_t jumps = 0;
    for (const Trajectory& t : paths) jumps += t.jumps().size();
    write_csv(ctx, "trajectories.csv", trajectories_csv(ctx.model, paths));
    write_json(ctx, "simulate.json",
               {{"command", "simulate"},
                {"paths", paths.size()},
                {"mean_jumps", static_cast<double>(jumps) / static_cast<double>(paths.size())}});
    return kPass;
}

int cmd_verify(const Context& ctx) {
    std::optional<ValueField> u;
    if (ctx.config.value_file) {
        try {
            u = read_value_field_csv(*ctx.config.value_file, ctx.model);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    } else {
        const MarginalLaw law = marginal_law(ctx.model, ctx.grid.front(), ctx.start, ctx.grid);
        u = solve(ctx, law).u;
    }
    if (std::abs(u->grid().front() - ctx.config.start_time) > 1e-12 ||
        std::abs(u->grid().back() - ctx.config.horizon) > 1e-12) {
        throw ConfigError("value field must span [start_time, horizon]");
    }
    const MarginalLaw law = marginal_law(ctx.model, u->grid().front(), ctx.start, u->grid());
    const ResidualStats stats =
        verify_pathwise(ctx.model, ctx.driver, ctx.h, *u, ctx.config.start_time, ctx.start,
                        PathwiseOptions{ctx.config.paths, ctx.config.seed, ctx.config.threads, 10});
    const AprioriReport apriori =
        check_apriori(ctx.model, law, *u, apriori_for(law, ctx.driver, ctx.h));

    const double tol = ctx.config.verify_residual_tol;
    std::string csv = "checkpoint,time,max_abs_residual,flagged\n";
    json flagged = json::array();
    for (std::size_t j = 0; j < stats.checkpoints.size(); ++j) {
        const bool bad = stats.checkpoint_max_residual[j] > tol;
        if (bad) flagged.push_back(j);
        csv += std::to_string(j) + ',' + format_double(stats.checkpoints[j]) + ',' +
               format_double(stats.checkpoint_max_residual[j]) + ',' + (bad ? "1" : "0") + '\n';
    }
    const bool residual_ok = stats.max_abs_residual <= tol;
    const bool martingale_ok =
        std::abs(stats.martingale_mean) <= 3.0 * stats.martingale_stderr;
    write_csv(ctx, "residuals.csv", csv);
    write_json(ctx, "verify.json",
               {{"command", "verify"},
                {"paths", stats.paths},
                {"grid_size", stats.grid_size},
                {"max_abs_residual", stats.max_abs_residual},
                {"mean_abs_residual", stats.mean_abs_residual},
                {"martingale_mean", stats.martingale_mean},
                {"martingale_stderr", stats.martingale_stderr},
                {"residual_tol", tol},
                {"flagged_checkpoints", flagged},
                {"residual_pass", residual_ok},
                {"martingale_pass", martingale_ok},
                {"apriori", apriori_json(apriori)}});
    return residual_ok && martingale_ok && apriori.pass ? kPass : kCheckFail;
}

int cmd_stability(const Context& ctx) {
    if (!(ctx.driver.alpha < 1.0)) {
        throw ConfigError("stability needs a driver with sublinear growth (alpha < 1)");
    }
    const MarginalLaw law = marginal_law(ctx.model, ctx.grid.front(), ctx.start, ctx.grid);
    StabilityOptions opts;
    opts.tol = ctx.config.stability_tol;
    opts.radii = ctx.config.radii;
    opts.threads = ctx.config.threads;
    opts.local.picard = PicardOptions{std::min(ctx.config.picard_tol, 1e-24), ctx.config.max_iter};
    const auto perturbations = additive_perturbations(
        ctx.driver, ctx.h, ctx.config.stability_indices, ctx.config.stability_scale);
    const StabilityReport report =
        stability_experiment(ctx.model, ctx.driver, ctx.h, law, perturbations, opts);

    std::string csv = "index,sq_b_distance,predicted_bound,phi,E_xi_diff_sq,M,lemma2_C,dominated\n";
    json runs = json::array();
    for (const StabilityRun& r : report.runs) {
        csv += format_double(r.index) + ',' + format_double(r.sq_b_distance) + ',' +
               format_double(r.predicted_bound) + ',' + format_double(r.phi) + ',' +
               format_double(r.E_xi_diff_sq) + ',' + format_double(r.M) + ',' +
               format_double(r.lemma2_C) + ',' + (r.dominated ? "1" : "0") + '\n';
        runs.push_back({{"index", r.index},
                        {"sq_b_distance", r.sq_b_distance},
                        {"predicted_bound", r.predicted_bound},
                        {"dominated", r.dominated}});
    }
    write_csv(ctx, "stability.csv", csv);
    write_json(ctx, "stability.json",
               {{"command", "stability"},
                {"runs", runs},
                {"monotone", report.monotone},
                {"strictly_decreasing", report.strictly_decreasing},
                {"final_below_tol", report.final_below_tol},
                {"dominated", report.dominated},
                {"pass", report.pass}});
    return report.pass ? kPass : kCheckFail;
}

int cmd_price(const Context& ctx) {
    const double s = ctx.config.sigma;
    const MarketSpec spec{ctx.model, MarketSpec::constant_sigma(s), s, s, ctx.driver, ctx.h};
    PricingOptions opts;
    opts.solver = ctx.config.solver == "local" ? SolverChoice::local : SolverChoice::lipschitz;
    opts.start_state = ctx.start;
    opts.picard = PicardOptions{ctx.config.picard_tol, ctx.config.max_iter};
    opts.radii = ctx.config.radii;
    opts.local.picard = PicardOptions{std::min(ctx.config.picard_tol, 1e-24), ctx.config.max_iter};
    const PricingResult result = price_claim(spec, ctx.grid, opts);
    const FeasibilityReport feas = feasibility_check(spec, result);
    write_csv(ctx, "pricing.csv", pricing_csv(spec, result));
    json rows = json::array();
    for (const FeasibilityRow& r : feas.rows) {
        rows.push_back({{"check", r.check}, {"value", r.value}, {"pass", r.pass}});
    }
    json body{{"command", "price"},
              {"price_at_start", result.price.row(0)},
              {"feasibility_min", result.feasibility},
              {"sup_price_sq", result.sup_u_sq},
              {"sufficient_condition", feas.sufficient_condition},
              {"checks", rows},
              {"pass", feas.pass}};
    if (result.K1) body["K1"] = *result.K1;
    write_json(ctx, "feasibility.json", body);
    return feas.pass ? kPass : kCheckFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-state jump BSDE solver and verifier"};
    std::string command;
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<std::size_t> grid;
    std::optional<double> tol;
    std::optional<unsigned> threads;
    app.add_option("command", command, "solve | simulate | verify | stability | price")
        ->required();
    app.add_option("--config", config_path, "YAML experiment config")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--paths", paths, "Monte Carlo paths");
    app.add_option("--grid", grid, "number of time steps N");
    app.add_option("--tol", tol, "Picard tolerance (squared B-distance)");
    app.add_option("--threads", threads, "worker threads");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    static const std::map<std::string, int (*)(const Context&)> commands{
        {"solve", cmd_solve},
        {"simulate", cmd_simulate},
        {"verify", cmd_verify},
        {"stability", cmd_stability},
        {"price", cmd_price}};
    const auto it = commands.find(command);
    if (it == commands.end()) {
        std::cerr << "unknown command '" << command << "'\n" << app.help();
        return kUsage;
    }

    try {
        ExperimentConfig config = load_config(config_path);
        if (seed) config.seed = *seed;
        if (paths) config.paths = *paths;
        if (grid) config.grid = *grid;
        if (tol) config.picard_tol = *tol;
        if (threads) config.threads = *threads;
        validate(config);
        fs::create_directories(out_dir);
        MarkovModel model = build_model(config);
        const StateIndex start = model.index_of(config.start_state);
        Context ctx{config,
                    fingerprint(config),
                    fs::path(out_dir),
                    model,
                    build_driver(config),
                    TerminalCondition(config.terminal),
                    TimeGrid::uniform(config.start_time, config.horizon, config.grid),
                    start};
        const int code = it->second(ctx);
        std::cout << command << ": " << (code == kPass ? "pass" : "check failed")
                  << " (fingerprint " << ctx.fp << ")\n";
        return code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return kCheckFail;
    }
}
