#include "jumpbsde/bsde_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace jumpbsde {

TerminalCondition::TerminalCondition(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
        throw std::domain_error("terminal condition needs at least one state");
    }
    for (std::size_t x = 0; x < values_.size(); ++x) {
        if (!std::isfinite(values_[x])) {
            throw std::domain_error("terminal condition is not finite at state " +
                                    std::to_string(x));
        }
    }
}

double TerminalCondition::sup_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double Driver::growth_bound(double y, double z_norm) const {
    return lambda * (1.0 + std::pow(std::abs(y), alpha) + std::pow(z_norm, alpha));
}

ValueField::ValueField(TimeGrid grid, std::size_t states, std::vector<double> values)
    : grid_(std::move(grid)), states_(states), values_(std::move(values)) {
    if (states_ == 0 || values_.size() != grid_.size() * states_) {
        throw std::domain_error("value field size does not match grid x states");
    }
}

ValueField::ValueField(TimeGrid grid, std::size_t states, double fill)
    : grid_(std::move(grid)), states_(states), values_(grid_.size() * states, fill) {
    if (states_ == 0) {
        throw std::domain_error("value field needs at least one state");
    }
}

void ValueField::interpolate_linear(double t, std::span<double> out) const {
    interpolate_row_linear(grid_, values_, states_, t, out);
}

ValueField ValueField::slice(std::size_t first, std::size_t last) const {
    TimeGrid sub = grid_.slice(first, last);
    std::vector<double> v(values_.begin() + static_cast<std::ptrdiff_t>(first * states_),
                          values_.begin() + static_cast<std::ptrdiff_t>((last + 1) * states_));
    return ValueField(std::move(sub), states_, std::move(v));
}

void ValueField::check_finite() const {
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        for (std::size_t x = 0; x < states_; ++x) {
            if (!std::isfinite(at(i, x))) {
                throw std::domain_error("value field not finite at grid index " +
                                        std::to_string(i) + ", state " + std::to_string(x));
            }
        }
    }
}

double sup_distance(const ValueField& u1, const ValueField& u2) {
    if (!(u1.grid() == u2.grid()) || u1.states() != u2.states()) {
        throw std::domain_error("value fields live on different grids");
    }
    double m = 0.0;
    const auto a = u1.values();
    const auto b = u2.values();
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

void z_field_from_row(std::span<const double> u_row, StateIndex x, std::span<double> out) {
    const double base = u_row[x];
    for (std::size_t y = 0; y < u_row.size(); ++y) {
        out[y] = u_row[y] - base;
    }
    out[x] = 0.0;
}

std::vector<double> z_field_from_value(const ValueField& u, double t, StateIndex x) {
    if (x >= u.states()) {
        throw std::domain_error("state index out of range");
    }
    const std::size_t i = u.grid().index_of(t);
    std::vector<double> z(u.states());
    z_field_from_row(u.row(i), x, z);
    return z;
}

double z_norm(const MarkovModel& model, double t, StateIndex x, std::span<const double> z) {
    const double m = model.modulation()(t);
    double acc = 0.0;
    for (const Edge& e : model.edges(x)) {
        acc += z[e.to] * z[e.to] * e.rate;
    }
    return std::sqrt(m * acc);
}

double evaluate_driver(const MarkovModel& model, const Driver& driver, double t, StateIndex x,
                       std::span<const double> u_row, std::span<double> scratch) {
    z_field_from_row(u_row, x, scratch);
    const double norm = z_norm(model, t, x, scratch);
    return driver.f(t, x, u_row[x], ZArg{scratch, norm});
}

BDistanceParts b_distance_parts(const MarkovModel& model, const MarginalLaw& law,
                                const ValueField& u1, const ValueField& u2) {
    if (!(u1.grid() == law.grid()) || !(u2.grid() == law.grid())) {
        throw std::domain_error("b_distance: fields and law must share one grid");
    }
    const std::size_t k = model.size();
    if (u1.states() != k || u2.states() != k || law.states() != k) {
        throw std::domain_error("b_distance: state count mismatch");
    }
    const auto weights = law.grid().trapezoid_weights();
    std::vector<double> diff(k);
    BDistanceParts parts;
    for (std::size_t i = 0; i < law.grid().size(); ++i) {
        const double t = law.grid()[i];
        const double m = model.modulation()(t);
        for (std::size_t y = 0; y < k; ++y) diff[y] = u1.at(i, y) - u2.at(i, y);
        double ey = 0.0;
        double ez = 0.0;
        for (std::size_t x = 0; x < k; ++x) {
            const double p = law.prob(i, x);
            if (p == 0.0) continue;
            ey += p * diff[x] * diff[x];
            double zz = 0.0;
            for (const Edge& e : model.edges(x)) {
                const double dz = diff[e.to] - diff[x];
                zz += dz * dz * e.rate;
            }
            ez += p * m * zz;
        }
        parts.y_part += weights[i] * ey;
        parts.z_part += weights[i] * ez;
    }
    return parts;
}

double b_distance(const MarkovModel& model, const MarginalLaw& law, const ValueField& u1,
                  const ValueField& u2) {
    return b_distance_parts(model, law, u1, u2).total();
}

BDistanceParts b_norm_parts(const MarkovModel& model, const MarginalLaw& law, const ValueField& u) {
    return b_distance_parts(model, law, u, ValueField(u.grid(), u.states(), 0.0));
}

}  // namespace jumpbsde
