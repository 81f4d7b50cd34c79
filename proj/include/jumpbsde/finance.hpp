#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jumpbsde/estimates.hpp"
#include "jumpbsde/solver_local.hpp"

namespace jumpbsde {

/// Invalid market specification or an induced driver that misses a solver hypothesis.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using VolatilityFn = std::function<double(double t, StateIndex x, StateIndex y)>;

/// Wealth equation data: volatility per (t, state, counterparty state) with bounded
/// inverse, generator g(t, x, y, pi) and a nonnegative payoff.
struct MarketSpec {
    MarkovModel model;
    VolatilityFn sigma;
    double sigma_min;
    double sigma_max;
    Driver g;
    TerminalCondition payoff;

    /// Scalar volatility broadcast over all edges.
    static VolatilityFn constant_sigma(double s);
};

/// Throws ConfigError naming the violated condition; sigma is swept over `grid`.
void validate_market(const MarketSpec& spec, const TimeGrid& grid);

/// f(t, x, y, z) = g(t, x, y, sigma^{-1} z) with growth and Lipschitz constants rescaled by
/// max(1, 1 / sigma_min).
Driver induced_driver(const MarketSpec& spec);

enum class SolverChoice { lipschitz, local };

struct PricingOptions {
    SolverChoice solver = SolverChoice::lipschitz;
    StateIndex start_state = 0;
    PicardOptions picard;
    std::vector<double> radii{2, 4, 8, 16, 32, 64};
    LocalSolveOptions local;
};

struct PricingResult {
    ValueField price;
    /// strategy[(i * K + x) * K + y] = pi(t_i, x, y) = z_u(t_i, x, y) / sigma(t_i, x, y).
    std::vector<double> strategy;
    double feasibility = 0.0;  ///< min over grid and states of u
    std::optional<double> K1;
    double sup_u_sq = 0.0;

    double pi(std::size_t i, StateIndex x, StateIndex y) const {
        const std::size_t k = price.states();
        return strategy[(i * k + x) * k + y];
    }
};

PricingResult price_claim(const MarketSpec& spec, const TimeGrid& grid,
                          const PricingOptions& options = {});

struct FeasibilityRow {
    std::string check;
    double value;
    bool pass;
};

struct FeasibilityReport {
    std::vector<FeasibilityRow> rows;
    bool sufficient_condition = false;  ///< g(., 0, 0) >= 0 and h >= 0
    bool pass = false;
};

FeasibilityReport feasibility_check(const MarketSpec& spec, const PricingResult& result);

/// CSV rows `time, state, price, min_strategy, max_strategy`.
std::string pricing_csv(const MarketSpec& spec, const PricingResult& result);

}  // namespace jumpbsde
