#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "jumpbsde/drivers.hpp"
#include "jumpbsde/finance.hpp"
#include "jumpbsde/solver_lipschitz.hpp"
#include "oracles.hpp"

using namespace jumpbsde;

namespace {

MarkovModel two_state(double T) { return MarkovModel({"s0", "s1"}, {{0, 1}, {1, 0}}, T); }

MarkovModel three_state() {
    return MarkovModel({"a", "b", "c"}, {{0, 1.3, 0.4}, {0.6, 0, 2.0}, {1.1, 0.2, 0}}, 1.0);
}

MarketSpec market(MarkovModel m, Driver g, std::vector<double> h, double sigma = 1.0) {
    return MarketSpec{std::move(m), MarketSpec::constant_sigma(sigma), sigma, sigma, std::move(g),
                      TerminalCondition(std::move(h))};
}

}  // namespace

TEST(Pricing, DiscountingMatchesClosedForm) {
    const auto spec = market(two_state(1.0), drivers::finance_discount(0.05), {1, 0});
    const auto g = TimeGrid::uniform(0.0, 1.0, 2000);
    PricingOptions opts;
    opts.picard = {1e-14, 200};
    const auto r = price_claim(spec, g, opts);
    for (int x = 0; x < 2; ++x) {
        EXPECT_NEAR(r.price.at(0, x), std::exp(-0.05) * oracle::symmetric_expectation(1, 0, 1.0, x),
                    1e-6);
    }
    EXPECT_TRUE(feasibility_check(spec, r).pass);
}

TEST(Pricing, DiscountingConstantClaim) {
    const auto spec = market(three_state(), drivers::finance_discount(0.05), {2, 2, 2});
    const auto g = TimeGrid::uniform(0.0, 1.0, 1000);
    const auto r = price_claim(spec, g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (StateIndex x = 0; x < 3; ++x) {
            EXPECT_NEAR(r.price.at(i, x), 2.0 * std::exp(-0.05 * (1.0 - g[i])), 1e-8);
        }
    }
}

TEST(Pricing, UnitVolatilityStrategyIsZ) {
    const auto spec = market(three_state(), drivers::linear(-0.1, 0.05, 0.3), {1, 0, 3});
    const auto g = TimeGrid::uniform(0.0, 1.0, 200);
    const auto r = price_claim(spec, g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (StateIndex x = 0; x < 3; ++x) {
            const auto z = z_field_from_value(r.price, g[i], x);
            for (StateIndex y = 0; y < 3; ++y) EXPECT_EQ(r.pi(i, x, y), z[y]);
        }
    }
}

TEST(Pricing, SubstitutionCoherence) {
    const auto spec = market(three_state(), drivers::linear(-0.1, 0.05, 0.3), {1, 0, 3}, 2.0);
    const auto g = TimeGrid::uniform(0.0, 1.0, 400);
    const auto r = price_claim(spec, g);
    const auto direct = solve_picard(spec.model, induced_driver(spec), spec.payoff, g, 0).u;
    EXPECT_LE(sup_distance(r.price, direct), 1e-12);
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (StateIndex x = 0; x < 3; ++x) {
            const auto z = z_field_from_value(direct, g[i], x);
            for (StateIndex y = 0; y < 3; ++y) EXPECT_NEAR(r.pi(i, x, y), z[y] / 2.0, 1e-12);
        }
    }
    // The induced driver sees pi = z / 2 and its norm.
    const auto f = induced_driver(spec);
    const std::vector<double> z{0.0, 4.0, -2.0};
    const std::vector<double> pi{0.0, 2.0, -1.0};
    const double expected = spec.g(0.0, 0, 1.0, ZArg{pi, z_norm(spec.model, 0.0, 0, pi)});
    EXPECT_DOUBLE_EQ(f(0.0, 0, 1.0, ZArg{z, z_norm(spec.model, 0.0, 0, z)}), expected);
}

TEST(Feasibility, ZeroAndPositiveGenerators) {
    const auto g = TimeGrid::uniform(0.0, 1.0, 400);
    const auto zero = market(three_state(), drivers::zero(), {0, 0, 0});
    const auto rz = price_claim(zero, g);
    for (double v : rz.price.values()) EXPECT_EQ(v, 0.0);
    const auto fz = feasibility_check(zero, rz);
    EXPECT_TRUE(fz.pass);
    EXPECT_TRUE(fz.sufficient_condition);

    for (const auto& d : {drivers::zero(), drivers::constant(0.1)}) {
        const auto spec = market(three_state(), d, {0.0, 0.5, 0.0});
        const auto r = price_claim(spec, g);
        EXPECT_GE(r.feasibility, -1e-9) << d.name;
        EXPECT_TRUE(feasibility_check(spec, r).pass) << d.name;
    }
}

TEST(Feasibility, BoundedClaimWithOscillatoryGenerator) {
    auto spec = market(two_state(1.0), drivers::osc_sqrtlog(), {1.0, 0.0});
    PricingOptions opts;
    opts.solver = SolverChoice::local;
    opts.local.lipschitz_samples = 0;
    const auto r = price_claim(spec, TimeGrid::uniform(0.0, 1.0, 500), opts);
    ASSERT_TRUE(r.K1.has_value());
    EXPECT_LE(r.sup_u_sq, *r.K1);
    const auto report = feasibility_check(spec, r);
    EXPECT_TRUE(report.sufficient_condition);  // sin(0) = 0
    EXPECT_GE(r.feasibility, -1e-9);
    EXPECT_TRUE(report.pass);
}

TEST(Feasibility, PayoffMonotonicity) {
    const auto g = TimeGrid::uniform(0.0, 1.0, 400);
    for (const auto& d : {drivers::linear(-0.3, 0.1, 0.5), drivers::finance_discount(0.05)}) {
        const auto lo = price_claim(market(three_state(), d, {0.0, 1.0, 0.5}), g);
        const auto hi = price_claim(market(three_state(), d, {0.2, 1.0, 0.9}), g);
        for (std::size_t i = 0; i < lo.price.values().size(); ++i) {
            EXPECT_GE(hi.price.values()[i], lo.price.values()[i] - 1e-9) << d.name;
        }
    }
}

TEST(Pricing, ConfigurationErrors) {
    const auto g = TimeGrid::uniform(0.0, 1.0, 50);
    EXPECT_THROW(price_claim(market(two_state(1.0), drivers::zero(), {-1.0, 0.0}), g), ConfigError);
    auto bad_sigma = market(two_state(1.0), drivers::zero(), {1.0, 0.0});
    bad_sigma.sigma_min = 0.5;
    bad_sigma.sigma_max = 0.8;
    EXPECT_THROW(price_claim(bad_sigma, g), ConfigError);
    EXPECT_THROW(price_claim(market(two_state(1.0), drivers::osc_sqrtlog(), {1.0, 0.0}), g),
                 ConfigError);
    PricingOptions local;
    local.solver = SolverChoice::local;
    EXPECT_THROW(price_claim(market(two_state(1.0), drivers::finance_discount(0.05), {1.0, 0.0}), g,
                             local),
                 ConfigError);
}

TEST(Pricing, CsvHeader) {
    const auto spec = market(two_state(1.0), drivers::zero(), {1.0, 0.0});
    const auto csv = pricing_csv(spec, price_claim(spec, TimeGrid::uniform(0.0, 1.0, 10)));
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "time,state,price,min_strategy,max_strategy");
}
