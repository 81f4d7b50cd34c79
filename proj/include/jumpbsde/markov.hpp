#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jumpbsde/grid.hpp"

namespace jumpbsde {

using StateIndex = std::size_t;

/// Positive scalar time modulation m(t) applied to a constant rate matrix.
struct Modulation {
    enum class Family { none, sinusoidal, linear };

    Family family = Family::none;
    /// sinusoidal: {amplitude a, frequency f}, m(t) = 1 + a sin(2 pi f t), |a| < 1.
    /// linear: {intercept c0, slope c1}, m(t) = c0 + c1 t, positive on [0, T].
    std::vector<double> params;

    double operator()(double t) const;
    /// sup of m over [0, horizon].
    double sup(double horizon) const;
    /// inf of m over [0, horizon].
    double inf(double horizon) const;

    static Modulation parse(std::string_view name, std::vector<double> params);
    std::string_view name() const;
};

struct Edge {
    StateIndex to;
    double rate;
};

/// Finite-state jump Markov model: labels, a constant rate matrix with zero
/// diagonal, horizon T and an optional modulation m(t); rate(t,x,y) = m(t) q(x,y).
class MarkovModel {
public:
    MarkovModel(std::vector<std::string> states, const std::vector<std::vector<double>>& rates,
                double horizon, Modulation modulation = {});

    std::size_t size() const { return states_.size(); }
    const std::vector<std::string>& states() const { return states_; }
    double horizon() const { return horizon_; }
    const Modulation& modulation() const { return modulation_; }
    bool time_homogeneous() const { return modulation_.family == Modulation::Family::none; }

    /// Throws std::domain_error for an unknown label.
    StateIndex index_of(std::string_view label) const;

    double base_rate(StateIndex x, StateIndex y) const { return dense_[x * size() + y]; }
    double rate(double t, StateIndex x, StateIndex y) const;
    /// v(t, x, Gamma).
    double total_rate(double t, StateIndex x) const;
    double base_total_rate(StateIndex x) const { return totals_[x]; }
    /// sup over t in [0, T] and x of v(t, x, Gamma).
    double sup_total_rate() const { return sup_total_; }
    /// Targets with a nonzero base rate.
    std::span<const Edge> edges(StateIndex x) const { return edges_[x]; }

    /// Row-major copy of the base matrix.
    std::vector<std::vector<double>> base_matrix() const;

private:
    void check_time(double t) const;
    void check_state(StateIndex x) const;

    std::vector<std::string> states_;
    std::vector<double> dense_;
    std::vector<std::vector<Edge>> edges_;
    std::vector<double> totals_;
    double horizon_;
    Modulation modulation_;
    double sup_total_ = 0.0;
};

/// Label-based form; unknown label -> std::domain_error.
double total_rate(const MarkovModel& model, double t, std::string_view state);

struct Jump {
    double time;
    StateIndex from;
    StateIndex to;

    bool operator==(const Jump&) const = default;
};

/// One simulated path: start (t0, x0), the marked point process (T_n, X_{T_n})
/// on (t0, horizon], and the horizon.
class Trajectory {
public:
    Trajectory(double t0, StateIndex x0, double horizon, std::vector<Jump> jumps);

    double start_time() const { return t0_; }
    StateIndex start_state() const { return x0_; }
    double horizon() const { return horizon_; }
    const std::vector<Jump>& jumps() const { return jumps_; }

    /// Right-continuous state X_t for t in [t0, horizon].
    StateIndex state_at(double t) const;
    StateIndex terminal_state() const { return jumps_.empty() ? x0_ : jumps_.back().to; }

    bool operator==(const Trajectory&) const = default;

private:
    double t0_;
    StateIndex x0_;
    double horizon_;
    std::vector<Jump> jumps_;
};

/// Exact path simulation on [t0, T]. Exponential holding times for the homogeneous
/// model; thinning against sup m(t) * total_rate(x) when modulated.
Trajectory simulate_path(const MarkovModel& model, double t0, StateIndex x0, std::uint64_t seed);

/// Paths 0..count-1 with per-path seeds derive_seed(master_seed, i).
std::vector<Trajectory> simulate_paths(const MarkovModel& model, double t0, StateIndex x0,
                                       std::uint64_t master_seed, std::size_t count,
                                       unsigned threads = 1);

/// Time marginals of X started at (t0, x0), one probability row per grid point.
class MarginalLaw {
public:
    MarginalLaw(TimeGrid grid, std::size_t states, StateIndex start, std::vector<double> probs);

    const TimeGrid& grid() const { return grid_; }
    std::size_t states() const { return states_; }
    StateIndex start_state() const { return start_; }
    double prob(std::size_t i, StateIndex x) const { return probs_[i * states_ + x]; }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(probs_).subspan(i * states_, states_);
    }
    /// Restriction to grid points [first, last].
    MarginalLaw slice(std::size_t first, std::size_t last) const;

private:
    TimeGrid grid_;
    std::size_t states_;
    StateIndex start_;
    std::vector<double> probs_;
};

/// Forward Kolmogorov equation on `grid` (must start at t0 and end at T) with
/// classical RK4; rows clamped at zero and renormalised.
MarginalLaw marginal_law(const MarkovModel& model, double t0, StateIndex x0, const TimeGrid& grid);

/// Real function z(t, from, to) together with the time range on which it is defined.
struct ZField {
    std::function<double(double t, StateIndex from, StateIndex to)> fn;
    double t_begin;
    double t_end;
};

/// Integrand g(r, X_r) evaluated along a path.
using PathIntegrand = std::function<double(double t, StateIndex x)>;

/// Tail integrals int_{s_j}^{T} g(r, X_r) dr for each query time s_j, by composite
/// Simpson on the pieces obtained by cutting [t0, T] at jump times, query times and
/// the points of `breakpoints` (so no piece is longer than its max step).
std::vector<double> path_tail_integrals(const Trajectory& traj, const PathIntegrand& integrand,
                                        const TimeGrid& breakpoints,
                                        std::span<const double> query_times);

/// int_{s_j}^{T} int z q(dr dy) for each query time s_j.
std::vector<double> compensated_tail_integrals(const MarkovModel& model, const Trajectory& traj,
                                               const ZField& z, const TimeGrid& breakpoints,
                                               std::span<const double> query_times);

/// sum_n z(T_n, X_{T_n-}, X_{T_n}) - int_{t0}^{T} sum_y z(r, X_r, y) rate(r, X_r, y) dr.
double compensated_integral(const MarkovModel& model, const Trajectory& traj, const ZField& z,
                            const TimeGrid& breakpoints);

}  // namespace jumpbsde
