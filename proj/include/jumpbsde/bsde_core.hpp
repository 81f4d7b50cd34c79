#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jumpbsde/grid.hpp"
#include "jumpbsde/markov.hpp"

namespace jumpbsde {

/// Terminal payoff h : states -> R, xi = h(X_T).
class TerminalCondition {
public:
    explicit TerminalCondition(std::vector<double> values);

    std::size_t size() const { return values_.size(); }
    double operator()(StateIndex x) const { return values_[x]; }
    std::span<const double> values() const { return values_; }
    double sup_abs() const;

private:
    std::vector<double> values_;
};

/// The z-argument of a driver: the field z(.) over states plus its norm
/// ||z|| = (sum_y |z(y)|^2 v(t, x, y))^{1/2} at the evaluation point.
struct ZArg {
    std::span<const double> values;
    double norm;
};

using DriverFn = std::function<double(double t, StateIndex x, double y, ZArg z)>;

/// Generator f(t, x, y, z(.)) with its declared growth and Lipschitz profile.
///
/// Growth: |f| <= lambda [1 + |y|^alpha + ||z||^alpha], alpha in (0, 1]. alpha = 1
/// is linear growth, admissible for the a-priori bounds but not for the
/// truncation pipeline, which needs alpha < 1.
struct Driver {
    std::string name;
    DriverFn f;
    double lambda = 1.0;
    double alpha = 0.5;
    /// Declared L_M on the ball B(0, M).
    std::function<double(double)> lipschitz_profile;
    /// Set when f is globally Lipschitz.
    std::optional<double> global_L;
    /// L in the admissible growth L_M <= L + sqrt(ln M).
    double lipschitz_base = 0.0;

    double operator()(double t, StateIndex x, double y, ZArg z) const { return f(t, x, y, z); }
    double growth_bound(double y, double z_norm) const;
};

/// u(t, x) on a time grid, rows = grid points, K columns.
class ValueField {
public:
    ValueField(TimeGrid grid, std::size_t states, std::vector<double> values);
    ValueField(TimeGrid grid, std::size_t states, double fill = 0.0);

    const TimeGrid& grid() const { return grid_; }
    std::size_t states() const { return states_; }
    double at(std::size_t i, StateIndex x) const { return values_[i * states_ + x]; }
    double& at(std::size_t i, StateIndex x) { return values_[i * states_ + x]; }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(values_).subspan(i * states_, states_);
    }
    std::span<double> row(std::size_t i) {
        return std::span<double>(values_).subspan(i * states_, states_);
    }
    std::span<const double> values() const { return values_; }

    /// u(t, .) with linear interpolation in time.
    void interpolate_linear(double t, std::span<double> out) const;
    ValueField slice(std::size_t first, std::size_t last) const;

    /// Throws std::domain_error naming the first non-finite entry.
    void check_finite() const;

private:
    TimeGrid grid_;
    std::size_t states_;
    std::vector<double> values_;
};

/// sup over grid and states of |u1 - u2|; grids must match.
double sup_distance(const ValueField& u1, const ValueField& u2);

/// z(y) = u(t, y) - u(t, x); t must be a grid point.
std::vector<double> z_field_from_value(const ValueField& u, double t, StateIndex x);

/// Same from one row of values; writes into `out`.
void z_field_from_row(std::span<const double> u_row, StateIndex x, std::span<double> out);

/// (sum_y |z(y)|^2 rate(t, x, y))^{1/2}.
double z_norm(const MarkovModel& model, double t, StateIndex x, std::span<const double> z);

/// f(t, x, u(x), u(.) - u(x)) from one row of u. `scratch` must hold K values.
double evaluate_driver(const MarkovModel& model, const Driver& driver, double t, StateIndex x,
                       std::span<const double> u_row, std::span<double> scratch);

struct BDistanceParts {
    double y_part = 0.0;
    double z_part = 0.0;
    double total() const { return y_part + z_part; }
};

/// E int |Y1 - Y2|^2 dr and E int ||Z1 - Z2||^2 dr, expectation against `law`,
/// trapezoid rule in time. Fields must share the law's grid.
BDistanceParts b_distance_parts(const MarkovModel& model, const MarginalLaw& law,
                                const ValueField& u1, const ValueField& u2);

/// Squared B-norm distance.
double b_distance(const MarkovModel& model, const MarginalLaw& law, const ValueField& u1,
                  const ValueField& u2);

/// Squared B-norm of a single field (distance to zero).
BDistanceParts b_norm_parts(const MarkovModel& model, const MarginalLaw& law, const ValueField& u);

}  // namespace jumpbsde
