#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "jumpbsde/drivers.hpp"
#include "jumpbsde/solver_lipschitz.hpp"
#include "oracles.hpp"

using namespace jumpbsde;

namespace {

MarkovModel two_state(double T) { return MarkovModel({"s0", "s1"}, {{0, 1}, {1, 0}}, T); }

MarkovModel three_state(double T) {
    return MarkovModel({"a", "b", "c"}, {{0, 1.3, 0.4}, {0.6, 0, 2.0}, {1.1, 0.2, 0}}, T,
                       Modulation::parse("sinusoidal", {0.3, 1.0}));
}

/// 0.5 sin(y) + 0.3 tanh(||z||) - 0.1, globally Lipschitz with L = 0.5.
Driver smooth_lipschitz() {
    Driver d;
    d.name = "smooth";
    d.f = [](double, StateIndex, double y, ZArg z) {
        return 0.5 * std::sin(y) + 0.3 * std::tanh(z.norm) - 0.1;
    };
    d.lambda = 0.9;
    d.alpha = 1.0;
    d.global_L = 0.5;
    d.lipschitz_profile = [](double) { return 0.5; };
    return d;
}

double sup_diff(const ValueField& a, const ValueField& b) { return sup_distance(a, b); }

}  // namespace

TEST(LinearFK, Examples) {
    const auto m = three_state(1.0);
    const auto g = TimeGrid::uniform(0.0, 1.0, 200);
    const auto constant = solve_linear_fk(
        m, [](double, StateIndex) { return 0.0; }, TerminalCondition({2.5, 2.5, 2.5}), g);
    for (double v : constant.values()) EXPECT_EQ(v, 2.5);

    const auto ramp = solve_linear_fk(
        m, [](double, StateIndex) { return 1.0; }, TerminalCondition({0, 0, 0}), g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (StateIndex x = 0; x < 3; ++x) EXPECT_NEAR(ramp.at(i, x), 1.0 - g[i], 1e-10);
    }

    const auto sym = two_state(1.0);
    const auto g2 = TimeGrid::uniform(0.0, 1.0, 1000);
    const auto u = solve_linear_fk(
        sym, [](double, StateIndex) { return 0.0; }, TerminalCondition({1, 0}), g2);
    EXPECT_NEAR(u.at(0, 0), (1.0 + std::exp(-2.0)) / 2.0, 1e-8);
}

TEST(LinearFK, RejectsBadGrids) {
    const auto m = two_state(1.0);
    const auto zero = [](double, StateIndex) { return 0.0; };
    EXPECT_THROW(solve_linear_fk(m, zero, TerminalCondition({1, 0}), TimeGrid::uniform(0.0, 2.0, 4)),
                 std::domain_error);
    EXPECT_THROW(solve_linear_fk(m, zero, TerminalCondition({1, 0, 0}), TimeGrid::uniform(0.0, 1.0, 4)),
                 std::domain_error);
}

TEST(LinearFK, LinearInTerminalAndSource) {
    const auto m = three_state(1.0);
    const auto g = TimeGrid::uniform(0.0, 1.0, 300);
    const auto g1 = [](double t, StateIndex x) { return std::cos(t) + x; };
    const auto g2 = [](double t, StateIndex x) { return t * t - 0.5 * x; };
    const TerminalCondition h1({1.0, -2.0, 0.5});
    const TerminalCondition h2({0.3, 0.1, -4.0});
    const auto u1 = solve_linear_fk(m, g1, h1, g);
    const auto u2 = solve_linear_fk(m, g2, h2, g);
    const auto u12 = solve_linear_fk(
        m, [&](double t, StateIndex x) { return g1(t, x) + g2(t, x); },
        TerminalCondition({1.3, -1.9, -3.5}), g);
    for (std::size_t i = 0; i < u12.values().size(); ++i) {
        EXPECT_NEAR(u12.values()[i], u1.values()[i] + u2.values()[i], 1e-10);
    }
}

TEST(PicardStep, Examples) {
    const auto m = two_state(1.0);
    const auto g = TimeGrid::uniform(0.0, 1.0, 100);
    const TerminalCondition h({1, 0});
    ValueField junk(g, 2, 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) junk.at(i, 0) = std::sin(10.0 * g[i]);
    const auto base = solve_linear_fk(m, [](double, StateIndex) { return 0.0; }, h, g);
    EXPECT_LE(sup_diff(picard_step(m, drivers::zero(), junk, h, g), base), 0.0);
    const auto c = solve_linear_fk(m, [](double, StateIndex) { return 0.3; }, h, g);
    EXPECT_LE(sup_diff(picard_step(m, drivers::constant(0.3), junk, h, g), c), 1e-15);
    EXPECT_THROW(picard_step(m, drivers::zero(), ValueField(TimeGrid::uniform(0, 1, 50), 2), h, g),
                 std::domain_error);
}

TEST(Picard, ZeroDriverConvergesImmediately) {
    const auto m = two_state(1.0);
    const auto g = TimeGrid::uniform(0.0, 1.0, 100);
    const auto r = solve_picard(m, drivers::zero(), TerminalCondition({1, 0}), g, 0);
    EXPECT_TRUE(r.diagnostics.converged);
    EXPECT_EQ(r.diagnostics.distances.size(), 1u);
    EXPECT_EQ(r.diagnostics.distances[0], 0.0);
}

TEST(Picard, LinearFixtureMatchesClosedForm) {
    const auto m = two_state(1.0);
    const auto g = TimeGrid::uniform(0.0, 1.0, 2000);
    const TerminalCondition h({1, 0});
    const auto r = solve_picard(m, drivers::linear(-0.5, 0.2), h, g, 0, {1e-14, 200});
    ASSERT_TRUE(r.diagnostics.converged);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); i += 10) {
        for (int x = 0; x < 2; ++x) {
            err = std::max(err, std::abs(r.u.at(i, x) -
                                         oracle::linear_bsde(-0.5, 0.2, 1, 0, 1.0 - g[i], x)));
        }
    }
    EXPECT_LE(err, 1e-6);
    const auto direct = solve_direct(m, drivers::linear(-0.5, 0.2), h, g);
    EXPECT_LE(sup_distance(direct, r.u), 1e-6);
}

TEST(Picard, FixedPointAndDiagnosticsShape) {
    const auto m = three_state(1.0);
    const auto g = TimeGrid::uniform(0.0, 1.0, 400);
    const TerminalCondition h({1.0, -0.5, 2.0});
    const auto law = marginal_law(m, 0.0, 0, g);
    const auto r = solve_picard(m, smooth_lipschitz(), h, law, {1e-20, 200});
    ASSERT_TRUE(r.diagnostics.converged);
    const auto& d = r.diagnostics;
    EXPECT_EQ(d.contraction_ratios.size(), d.distances.size() - 1);
    for (std::size_t k = 0; k + 1 < d.distances.size(); ++k) EXPECT_GT(d.distances[k], 0.0);
    const auto again = picard_step(m, smooth_lipschitz(), r.u, h, g);
    EXPECT_LE(b_distance(m, law, again, r.u), 1e-12);
}

TEST(Picard, ContractsAtShortHorizon) {
    const auto m = three_state(0.5);
    const auto g = TimeGrid::uniform(0.0, 0.5, 500);
    const TerminalCondition h({1.0, -0.5, 2.0});
    for (const auto& d : {drivers::linear(-0.5, 0.2), drivers::linear(1.0, -0.3, 0.8),
                          drivers::finance_discount(0.05), smooth_lipschitz()}) {
        const auto r = solve_picard(m, d, h, g, 1, {1e-22, 200});
        const auto& ratios = r.diagnostics.contraction_ratios;
        for (std::size_t k = 1; k < ratios.size(); ++k) {
            if (r.diagnostics.distances[k + 1] < 1e-26) break;  // roundoff floor
            EXPECT_LE(ratios[k], 0.9) << d.name << " iteration " << k;
        }
    }
}

TEST(Picard, NonConvergenceIsReported) {
    const auto m = two_state(1.0);
    const auto g = TimeGrid::uniform(0.0, 1.0, 100);
    const auto r = solve_picard(m, drivers::linear(-0.5, 0.2), TerminalCondition({1, 0}), g, 0,
                                {1e-30, 2});
    EXPECT_FALSE(r.diagnostics.converged);
    EXPECT_EQ(r.diagnostics.distances.size(), 2u);
}

TEST(Picard, RequiresGlobalLipschitz) {
    const auto m = two_state(1.0);
    const auto g = TimeGrid::uniform(0.0, 1.0, 10);
    EXPECT_THROW(solve_picard(m, drivers::osc_sqrtlog(), TerminalCondition({1, 0}), g, 0),
                 std::domain_error);
}

TEST(Direct, AgreesWithPicardOnLipschitzFixtures) {
    const auto m = three_state(1.0);
    const auto g = TimeGrid::uniform(0.0, 1.0, 2000);
    const TerminalCondition h({1.0, -0.5, 2.0});
    for (const auto& d : {drivers::linear(-0.5, 0.2), drivers::linear(1.0, -0.3, 0.8),
                          drivers::finance_discount(0.05), smooth_lipschitz()}) {
        const auto p = solve_picard(m, d, h, g, 0, {1e-14, 200});
        ASSERT_TRUE(p.diagnostics.converged) << d.name;
        EXPECT_LE(sup_distance(p.u, solve_direct(m, d, h, g)), 1e-6) << d.name;
        for (StateIndex x = 0; x < 3; ++x) EXPECT_EQ(p.u.at(g.size() - 1, x), h(x));
    }
}

TEST(Direct, FourthOrderConvergence) {
    const auto m = three_state(1.0);
    const TerminalCondition h({1.0, -0.5, 2.0});
    const auto d = smooth_lipschitz();
    const auto ref = solve_direct(m, d, h, TimeGrid::uniform(0.0, 1.0, 8000));
    const auto err = [&](std::size_t n) {
        const auto u = solve_direct(m, d, h, TimeGrid::uniform(0.0, 1.0, n));
        double e = 0.0;
        for (std::size_t i = 0; i < u.grid().size(); ++i) {
            for (StateIndex x = 0; x < 3; ++x) {
                e = std::max(e, std::abs(u.at(i, x) - ref.at(i * (8000 / n), x)));
            }
        }
        return e;
    };
    const double ratio = err(500) / err(1000);
    EXPECT_GT(ratio, 12.0);
    EXPECT_LT(ratio, 20.0);
}

TEST(Direct, DivergenceIsNamed) {
    const auto m = two_state(1.0);
    Driver blowup;
    blowup.name = "square";
    blowup.f = [](double, StateIndex, double y, ZArg) { return y * y; };
    blowup.lambda = 1.0;
    blowup.alpha = 1.0;
    blowup.lipschitz_profile = [](double M) { return 2.0 * M; };
    try {
        solve_direct(m, blowup, TerminalCondition({5.0, 5.0}), TimeGrid::uniform(0.0, 1.0, 400));
        FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
        EXPECT_LT(e.grid_index(), 400u);
        EXPECT_GT(e.time(), 0.0);
    }
}

TEST(Picard, DiagnosticsCsvHeader) {
    PicardDiagnostics d;
    d.distances = {1.0, 0.5};
    d.contraction_ratios = {0.5};
    const auto csv = picard_diagnostics_csv(d);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "iteration,sq_b_distance,contraction_ratio");
}
