#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "jumpbsde/drivers.hpp"
#include "jumpbsde/estimates.hpp"
#include "jumpbsde/solver_lipschitz.hpp"
#include "jumpbsde/solver_local.hpp"

using namespace jumpbsde;

namespace {

MarkovModel two_state(double T) { return MarkovModel({"s0", "s1"}, {{0, 1}, {1, 0}}, T); }

Driver scaled(const Driver& d, double c) {
    Driver out = d;
    out.f = [f = d.f, c](double t, StateIndex x, double y, ZArg z) { return c * f(t, x, y, z); };
    return out;
}

}  // namespace

TEST(Apriori, Examples) {
    const auto zero_T = apriori_constants(1.7, 0.0, 0.42, 0.9);
    EXPECT_EQ(zero_T.C1, 0.42);
    EXPECT_EQ(zero_T.C2, 0.84);
    EXPECT_EQ(*zero_T.K1, 0.9);

    const auto c = apriori_constants(1.0, 1.0, 1.0, 1.0);
    EXPECT_NEAR(c.C1, 10.0 * std::exp(4.0), 1e-10);
    EXPECT_NEAR(c.C1, 545.98, 0.01);
    EXPECT_NEAR(c.C2, 20.0 + 10.0 * c.C1, 1e-9);
    EXPECT_NEAR(c.C2, 5479.8, 0.1);
    EXPECT_NEAR(*c.K1, 10.0 * std::exp(12.0), 1e-6);
    EXPECT_FALSE(apriori_constants(1.0, 1.0, 1.0).K1.has_value());

    EXPECT_THROW(apriori_constants(-1.0, 1.0, 1.0), std::domain_error);
    EXPECT_THROW(apriori_constants(1.0, -1.0, 1.0), std::domain_error);
    EXPECT_THROW(apriori_constants(1.0, 1.0, -1.0), std::domain_error);
}

TEST(Apriori, MonotoneInEachInput) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int s = 0; s < 1000; ++s) {
        const double l = u(rng) + 0.01, T = u(rng), E = u(rng), d = 0.1 * u(rng);
        const auto base = apriori_constants(l, T, E);
        EXPECT_GE(base.C1, E);
        for (const auto& more : {apriori_constants(l + d, T, E), apriori_constants(l, T + d, E),
                                 apriori_constants(l, T, E + d)}) {
            EXPECT_GE(more.C1, base.C1);
            EXPECT_GE(more.C2, base.C2);
        }
    }
}

TEST(Apriori, SolvedFixturesSatisfyBounds) {
    const auto m = two_state(1.0);
    const auto g = TimeGrid::uniform(0.0, 1.0, 1000);
    const auto law = marginal_law(m, 0.0, 0, g);

    const TerminalCondition zero_h({0, 0});
    const auto zero_u = solve_picard(m, drivers::zero(), zero_h, law).u;
    const auto zr = check_apriori(m, law, zero_u, apriori_for(law, drivers::zero(), zero_h));
    EXPECT_TRUE(zr.pass);
    for (const auto& c : zr.checks) EXPECT_EQ(c.measured_value, 0.0) << c.bound_name;

    const TerminalCondition h({1, 0});
    const auto lin = drivers::linear(-0.5, 0.2);
    const auto u = solve_picard(m, lin, h, law, {1e-14, 200}).u;
    const auto consts = apriori_for(law, lin, h);
    EXPECT_EQ(consts.lambda, lin.lambda);
    EXPECT_NEAR(consts.E_xi_sq, (1.0 + std::exp(-2.0)) / 2.0, 1e-8);
    const auto r = check_apriori(m, law, u, consts);
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.checks.size(), 3u);
    for (const auto& c : r.checks) {
        EXPECT_LE(c.measured_value, c.bound_value) << c.bound_name;
        EXPECT_GT(c.measured_value, 0.0) << c.bound_name;
    }
}

TEST(Apriori, ViolationIsReported) {
    const auto m = two_state(1.0);
    const auto g = TimeGrid::uniform(0.0, 1.0, 100);
    const auto law = marginal_law(m, 0.0, 0, g);
    const ValueField huge(g, 2, 1e6);
    const auto r = check_apriori(m, law, huge, apriori_constants(1.0, 1.0, 1.0, 1.0));
    EXPECT_FALSE(r.pass);
}

TEST(Phi, Examples) {
    const auto m = two_state(1.0);
    const auto law = marginal_law(m, 0.25, 0, TimeGrid::uniform(0.25, 1.0, 60));
    const auto osc = drivers::osc_sqrtlog();
    EXPECT_EQ(phi_seminorm(m, law, osc, osc, 8.0), 0.0);
    const auto shifted = drivers::shifted(osc, -0.3);
    EXPECT_NEAR(phi_seminorm(m, law, shifted, osc, 8.0), 0.3 * std::sqrt(0.75), 1e-10);
    for (double n : {2.0, 4.0, 8.0}) {
        const auto fn = truncate_driver(osc, n);
        for (double M : {1.0, 1.5, n}) EXPECT_EQ(phi_seminorm(m, law, fn, osc, M), 0.0);
        EXPECT_GT(phi_seminorm(m, law, fn, osc, 2.0 * n), 0.0);
    }
}

TEST(Phi, HomogeneousAndMonotoneInRadius) {
    const auto m = MarkovModel({"a", "b", "c"}, {{0, 1.3, 0.4}, {0.6, 0, 2.0}, {1.1, 0.2, 0}}, 1.0);
    const auto law = marginal_law(m, 0.0, 2, TimeGrid::uniform(0.0, 1.0, 20));
    const auto osc = drivers::osc_sqrtlog();
    const auto lin = drivers::linear(0.3, 0.1, 0.2);
    const auto zero = drivers::zero();
    const double base = phi_seminorm(m, law, osc, zero, 5.0);
    EXPECT_NEAR(phi_seminorm(m, law, scaled(osc, -2.5), zero, 5.0), 2.5 * base, 1e-12 * base);
    double prev = 0.0;
    for (double M : {1.0, 1.5, 2.0, 3.0, 4.5, 8.0, 16.0}) {
        const double v = phi_seminorm(m, law, osc, lin, M);
        EXPECT_GE(v, prev) << M;
        prev = v;
    }
    EXPECT_THROW(phi_seminorm(m, law, osc, lin, 0.5), std::domain_error);
}

TEST(StabilityEnvelope, Examples) {
    const double C = lemma2_constant(1.0, 0.5, 1.0, 10.0, 20.0);
    const double expected =
        6.0 * (2.0 + 2.0 * std::sqrt(10.0) * std::sqrt(60.0) + 2.0 * std::pow(20.0, 0.25) * std::pow(60.0, 0.75));
    EXPECT_NEAR(C, expected, 1e-9 * expected);

    Lemma2Inputs in{C, 0.01, 0.0, 0.0, 1.0, 4.0, 0.5, 1.0, 1.0};
    EXPECT_NEAR(lemma2_bound(in).y_bound, 0.01 + C / (3.0 * 4.0), 1e-12 * C);

    Lemma2Inputs same{C, 0.0, 0.0, 0.0, 1.0, 4.0, 0.5, 1.0, 0.0};
    double prev = lemma2_bound(same).y_bound;
    EXPECT_GT(prev, 0.0);
    for (double M : {8.0, 64.0, 1e4, 1e8, 1e16}) {
        same.M = M;
        const double v = lemma2_bound(same).y_bound;
        EXPECT_LE(v, prev);
        prev = v;
    }
    EXPECT_LT(prev, 1e-3);

    EXPECT_EQ(lemma2_bound(in).z_bound(0.5), C * 0.51);
    in.M = 1.0;
    EXPECT_THROW(lemma2_bound(in), std::domain_error);
}

TEST(Stability, ZeroPerturbationsGiveZeroDistances) {
    const auto m = two_state(0.4);
    const auto law = marginal_law(m, 0.0, 0, TimeGrid::uniform(0.0, 0.4, 200));
    const auto osc = drivers::osc_sqrtlog();
    const TerminalCondition h({1, 0});
    const auto report =
        stability_experiment(m, osc, h, law, additive_perturbations(osc, h, {1, 2, 4}, 0.0));
    ASSERT_EQ(report.runs.size(), 3u);
    for (const auto& r : report.runs) {
        EXPECT_EQ(r.sq_b_distance, 0.0);
        EXPECT_EQ(r.E_xi_diff_sq, 0.0);
        EXPECT_EQ(r.phi, 0.0);
        EXPECT_TRUE(r.dominated);
    }
    EXPECT_TRUE(report.pass);
}

TEST(Stability, AdditivePerturbationsShrink) {
    const auto m = two_state(0.4);
    const auto law = marginal_law(m, 0.0, 0, TimeGrid::uniform(0.0, 0.4, 400));
    const auto osc = drivers::osc_sqrtlog();
    const TerminalCondition h({1, 0});
    const auto perts = additive_perturbations(osc, h, {1, 2, 4, 8, 16, 32});
    EXPECT_DOUBLE_EQ(perts[2].h(0), 1.25);
    const auto report = stability_experiment(m, osc, h, law, perts);
    ASSERT_EQ(report.runs.size(), 6u);
    EXPECT_TRUE(report.strictly_decreasing);
    EXPECT_TRUE(report.dominated);
    for (const auto& r : report.runs) {
        EXPECT_NEAR(r.E_xi_diff_sq, 1.0 / (r.index * r.index), 1e-12);
        EXPECT_NEAR(r.phi, std::sqrt(0.4) / r.index, 1e-10);
        EXPECT_LE(r.sq_b_distance, r.predicted_bound);
    }
    EXPECT_LT(report.runs.back().sq_b_distance, 1e-3);
}
