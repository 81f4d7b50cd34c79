#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "jumpbsde/grid.hpp"

using jumpbsde::TimeGrid;

TEST(TimeGrid, RejectsDegenerateInput) {
    EXPECT_THROW(TimeGrid({0.0}), std::domain_error);
    EXPECT_THROW(TimeGrid({0.0, 0.0}), std::domain_error);
    EXPECT_THROW(TimeGrid({0.0, 0.5, 0.4}), std::domain_error);
    EXPECT_THROW(TimeGrid({0.0, NAN}), std::domain_error);
    EXPECT_THROW(TimeGrid::uniform(0.0, 1.0, 0), std::domain_error);
    EXPECT_THROW(TimeGrid::uniform(1.0, 1.0, 4), std::domain_error);
}

TEST(TimeGrid, UniformEndpointsAreExact) {
    const auto g = TimeGrid::uniform(0.1, 0.7, 3);
    EXPECT_EQ(g.size(), 4u);
    EXPECT_EQ(g.front(), 0.1);
    EXPECT_EQ(g.back(), 0.7);
    EXPECT_NEAR(g.max_step(), 0.2, 1e-15);
}

TEST(TimeGrid, IndexOfAndCellOf) {
    const auto g = TimeGrid::uniform(0.0, 1.0, 10);
    EXPECT_EQ(g.index_of(0.3), 3u);
    EXPECT_EQ(g.index_of(1.0), 10u);
    EXPECT_THROW(g.index_of(0.35), std::domain_error);
    EXPECT_EQ(g.cell_of(0.35), 3u);
    EXPECT_EQ(g.cell_of(1.0), 9u);
    EXPECT_EQ(g.cell_of(0.0), 0u);
}

TEST(TimeGrid, TrapezoidWeightsIntegrateLinearExactly) {
    const TimeGrid g({0.0, 0.1, 0.35, 0.5, 1.0});
    const auto w = g.trapezoid_weights();
    EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-15);
    double integral = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) integral += w[i] * (2.0 * g[i] + 1.0);
    EXPECT_NEAR(integral, 2.0, 1e-14);
}

TEST(TimeGrid, SliceKeepsPoints) {
    const auto g = TimeGrid::uniform(0.0, 1.0, 10);
    const auto s = g.slice(2, 5);
    EXPECT_EQ(s.size(), 4u);
    EXPECT_EQ(s.front(), g[2]);
    EXPECT_EQ(s.back(), g[5]);
}

TEST(Interpolation, CubicIsExactOnCubicsAndAtNodes) {
    const TimeGrid g({0.0, 0.07, 0.2, 0.26, 0.5, 0.61, 0.9, 1.0});
    const auto poly = [](double t) { return 1.0 - 2.0 * t + 3.0 * t * t - 4.0 * t * t * t; };
    std::vector<double> vals(g.size() * 2);
    for (std::size_t i = 0; i < g.size(); ++i) {
        vals[2 * i] = poly(g[i]);
        vals[2 * i + 1] = -poly(g[i]);
    }
    double out[2];
    for (double t = 0.0; t <= 1.0; t += 0.013) {
        jumpbsde::interpolate_row_cubic(g, vals, 2, t, out);
        EXPECT_NEAR(out[0], poly(t), 1e-13);
        EXPECT_NEAR(out[1], -poly(t), 1e-13);
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
        jumpbsde::interpolate_row_cubic(g, vals, 2, g[i], out);
        EXPECT_NEAR(out[0], vals[2 * i], 1e-15);
    }
}

TEST(Interpolation, LinearIsExactOnLines) {
    const TimeGrid g({0.0, 0.3, 0.4, 1.0});
    std::vector<double> vals;
    for (double t : g.points()) vals.push_back(5.0 * t - 1.0);
    double out[1];
    for (double t = 0.0; t <= 1.0; t += 0.05) {
        jumpbsde::interpolate_row_linear(g, vals, 1, t, out);
        EXPECT_NEAR(out[0], 5.0 * t - 1.0, 1e-14);
    }
}
