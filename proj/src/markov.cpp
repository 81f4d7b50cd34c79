#include "jumpbsde/markov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "jumpbsde/parallel.hpp"
#include "jumpbsde/rng.hpp"

namespace jumpbsde {

namespace {

bool same_time(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }

}  // namespace

// ---------------------------------------------------------------------------
// Modulation
// ---------------------------------------------------------------------------

double Modulation::operator()(double t) const {
    switch (family) {
        case Family::none:
            return 1.0;
        case Family::sinusoidal:
            return 1.0 + params[0] * std::sin(2.0 * std::numbers::pi * params[1] * t);
        case Family::linear:
            return params[0] + params[1] * t;
    }
    return 1.0;
}

double Modulation::sup(double horizon) const {
    switch (family) {
        case Family::none:
            return 1.0;
        case Family::sinusoidal:
            return 1.0 + std::abs(params[0]);
        case Family::linear:
            return std::max(params[0], params[0] + params[1] * horizon);
    }
    return 1.0;
}

double Modulation::inf(double horizon) const {
    switch (family) {
        case Family::none:
            return 1.0;
        case Family::sinusoidal:
            return 1.0 - std::abs(params[0]);
        case Family::linear:
            return std::min(params[0], params[0] + params[1] * horizon);
    }
    return 1.0;
}

Modulation Modulation::parse(std::string_view name, std::vector<double> params) {
    Modulation m;
    m.params = std::move(params);
    if (name == "none") {
        m.family = Family::none;
        if (!m.params.empty()) {
            throw std::domain_error("modulation 'none' takes no parameters");
        }
    } else if (name == "sinusoidal") {
        m.family = Family::sinusoidal;
        if (m.params.size() != 2) {
            throw std::domain_error("modulation 'sinusoidal' takes [amplitude, frequency]");
        }
        if (!(std::abs(m.params[0]) < 1.0)) {
            throw std::domain_error("sinusoidal modulation needs |amplitude| < 1");
        }
    } else if (name == "linear") {
        m.family = Family::linear;
        if (m.params.size() != 2) {
            throw std::domain_error("modulation 'linear' takes [intercept, slope]");
        }
    } else {
        throw std::domain_error("unknown modulation family '" + std::string(name) + "'");
    }
    for (double p : m.params) {
        if (!std::isfinite(p)) {
            throw std::domain_error("modulation parameter is not finite");
        }
    }
    return m;
}

std::string_view Modulation::name() const {
    switch (family) {
        case Family::none:
            return "none";
        case Family::sinusoidal:
            return "sinusoidal";
        case Family::linear:
            return "linear";
    }
    return "none";
}

// ---------------------------------------------------------------------------
// MarkovModel
// ---------------------------------------------------------------------------

MarkovModel::MarkovModel(std::vector<std::string> states,
                         const std::vector<std::vector<double>>& rates, double horizon,
                         Modulation modulation)
    : states_(std::move(states)), horizon_(horizon), modulation_(std::move(modulation)) {
    const std::size_t k = states_.size();
    if (k == 0) {
        throw std::domain_error("model needs at least one state");
    }
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            if (states_[i] == states_[j]) {
                throw std::domain_error("duplicate state label '" + states_[i] + "'");
            }
        }
    }
    if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) {
        throw std::domain_error("horizon must be positive and finite");
    }
    if (rates.size() != k) {
        throw std::domain_error("rate matrix must have one row per state");
    }
    if (!(modulation_.inf(horizon_) > 0.0)) {
        throw std::domain_error("modulation must stay positive on [0, T]");
    }
    dense_.assign(k * k, 0.0);
    edges_.resize(k);
    totals_.assign(k, 0.0);
    for (std::size_t x = 0; x < k; ++x) {
        if (rates[x].size() != k) {
            throw std::domain_error("rate matrix row " + std::to_string(x) + " has wrong length");
        }
        for (std::size_t y = 0; y < k; ++y) {
            const double r = rates[x][y];
            if (!std::isfinite(r) || r < 0.0) {
                throw std::domain_error("rates must be finite and nonnegative");
            }
            if (x == y) {
                if (r != 0.0) {
                    throw std::domain_error("rate matrix diagonal must be zero (state '" +
                                            states_[x] + "')");
                }
                continue;
            }
            dense_[x * k + y] = r;
            if (r > 0.0) {
                edges_[x].push_back({y, r});
                totals_[x] += r;
            }
        }
    }
    const double peak = *std::max_element(totals_.begin(), totals_.end());
    sup_total_ = modulation_.sup(horizon_) * peak;
    if (!std::isfinite(sup_total_)) {
        throw std::domain_error("sup of total rate is not finite");
    }
}

StateIndex MarkovModel::index_of(std::string_view label) const {
    for (std::size_t i = 0; i < states_.size(); ++i) {
        if (states_[i] == label) {
            return i;
        }
    }
    throw std::domain_error("unknown state label '" + std::string(label) + "'");
}

void MarkovModel::check_time(double t) const {
    const double slack = 1e-12 * std::max(1.0, horizon_);
    if (!(t >= -slack && t <= horizon_ + slack)) {
        throw std::domain_error("time " + std::to_string(t) + " outside [0, T]");
    }
}

void MarkovModel::check_state(StateIndex x) const {
    if (x >= size()) {
        throw std::domain_error("state index " + std::to_string(x) + " out of range");
    }
}

double MarkovModel::rate(double t, StateIndex x, StateIndex y) const {
    check_time(t);
    check_state(x);
    check_state(y);
    return modulation_(t) * dense_[x * size() + y];
}

double MarkovModel::total_rate(double t, StateIndex x) const {
    check_time(t);
    check_state(x);
    return modulation_(t) * totals_[x];
}

std::vector<std::vector<double>> MarkovModel::base_matrix() const {
    const std::size_t k = size();
    std::vector<std::vector<double>> out(k, std::vector<double>(k, 0.0));
    for (std::size_t x = 0; x < k; ++x) {
        for (std::size_t y = 0; y < k; ++y) {
            out[x][y] = dense_[x * k + y];
        }
    }
    return out;
}

double total_rate(const MarkovModel& model, double t, std::string_view state) {
    return model.total_rate(t, model.index_of(state));
}

// ---------------------------------------------------------------------------
// Trajectory
// ---------------------------------------------------------------------------

Trajectory::Trajectory(double t0, StateIndex x0, double horizon, std::vector<Jump> jumps)
    : t0_(t0), x0_(x0), horizon_(horizon), jumps_(std::move(jumps)) {
    if (!(horizon_ > t0_)) {
        throw std::domain_error("trajectory horizon must exceed its start time");
    }
    StateIndex current = x0_;
    double last = t0_;
    for (const Jump& j : jumps_) {
        if (!(j.time > last) || j.time > horizon_) {
            throw std::domain_error("jump times must be strictly increasing in (t0, horizon]");
        }
        if (j.from != current || j.to == j.from) {
            throw std::domain_error("jump must leave the current state for a different one");
        }
        current = j.to;
        last = j.time;
    }
}

StateIndex Trajectory::state_at(double t) const {
    if (t < t0_ || t > horizon_) {
        throw std::domain_error("time outside the trajectory range");
    }
    auto it = std::upper_bound(jumps_.begin(), jumps_.end(), t,
                               [](double value, const Jump& j) { return value < j.time; });
    return it == jumps_.begin() ? x0_ : std::prev(it)->to;
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

namespace {

StateIndex pick_target(const MarkovModel& model, StateIndex x, PathRng& rng) {
    const auto edges = model.edges(x);
    const double target = rng.uniform() * model.base_total_rate(x);
    double acc = 0.0;
    for (const Edge& e : edges) {
        acc += e.rate;
        if (target < acc) {
            return e.to;
        }
    }
    return edges.back().to;
}

}  // namespace

Trajectory simulate_path(const MarkovModel& model, double t0, StateIndex x0, std::uint64_t seed) {
    const double horizon = model.horizon();
    if (!(t0 >= 0.0 && t0 < horizon)) {
        throw std::domain_error("simulate_path needs 0 <= t0 < T");
    }
    if (x0 >= model.size()) {
        throw std::domain_error("start state out of range");
    }
    PathRng rng(seed);
    const double m_sup = model.modulation().sup(horizon);
    const bool homogeneous = model.time_homogeneous();

    std::vector<Jump> jumps;
    StateIndex x = x0;
    double t = t0;
    for (;;) {
        const double base = model.base_total_rate(x);
        if (base <= 0.0) {
            break;
        }
        if (homogeneous) {
            t += rng.exponential(base);
            if (t > horizon) {
                break;
            }
        } else {
            // Thinning: candidates at rate m_sup * base, accepted with prob m(t) / m_sup.
            t += rng.exponential(m_sup * base);
            if (t > horizon) {
                break;
            }
            if (rng.uniform() * m_sup >= model.modulation()(t)) {
                continue;
            }
        }
        const StateIndex y = pick_target(model, x, rng);
        jumps.push_back({t, x, y});
        x = y;
    }
    return Trajectory(t0, x0, horizon, std::move(jumps));
}

std::vector<Trajectory> simulate_paths(const MarkovModel& model, double t0, StateIndex x0,
                                       std::uint64_t master_seed, std::size_t count,
                                       unsigned threads) {
    std::vector<Trajectory> out(count, Trajectory(t0, x0, model.horizon(), {}));
    parallel_for(count, threads, [&](std::size_t i) {
        out[i] = simulate_path(model, t0, x0, derive_seed(master_seed, i));
    });
    return out;
}

// ---------------------------------------------------------------------------
// Marginal law
// ---------------------------------------------------------------------------

MarginalLaw::MarginalLaw(TimeGrid grid, std::size_t states, StateIndex start,
                         std::vector<double> probs)
    : grid_(std::move(grid)), states_(states), start_(start), probs_(std::move(probs)) {
    if (probs_.size() != grid_.size() * states_) {
        throw std::domain_error("marginal law size does not match grid x states");
    }
}

MarginalLaw MarginalLaw::slice(std::size_t first, std::size_t last) const {
    TimeGrid sub = grid_.slice(first, last);
    std::vector<double> p(probs_.begin() + static_cast<std::ptrdiff_t>(first * states_),
                          probs_.begin() + static_cast<std::ptrdiff_t>((last + 1) * states_));
    return MarginalLaw(std::move(sub), states_, start_, std::move(p));
}

namespace {

void forward_rhs(const MarkovModel& model, double t, std::span<const double> p,
                 std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    const double m = model.modulation()(t);
    for (StateIndex x = 0; x < model.size(); ++x) {
        for (const Edge& e : model.edges(x)) {
            const double flow = p[x] * m * e.rate;
            out[e.to] += flow;
            out[x] -= flow;
        }
    }
}

}  // namespace

MarginalLaw marginal_law(const MarkovModel& model, double t0, StateIndex x0, const TimeGrid& grid) {
    const std::size_t k = model.size();
    if (x0 >= k) {
        throw std::domain_error("start state out of range");
    }
    if (!same_time(grid.front(), t0) || !same_time(grid.back(), model.horizon())) {
        throw std::domain_error("marginal law grid must run from t0 to T");
    }
    std::vector<double> probs(grid.size() * k, 0.0);
    probs[x0] = 1.0;

    std::vector<double> p(k), k1(k), k2(k), k3(k), k4(k), tmp(k);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        std::copy_n(probs.begin() + static_cast<std::ptrdiff_t>(i * k), k, p.begin());
        const double t = grid[i];
        const double h = grid[i + 1] - t;
        forward_rhs(model, t, p, k1);
        for (std::size_t a = 0; a < k; ++a) tmp[a] = p[a] + 0.5 * h * k1[a];
        forward_rhs(model, t + 0.5 * h, tmp, k2);
        for (std::size_t a = 0; a < k; ++a) tmp[a] = p[a] + 0.5 * h * k2[a];
        forward_rhs(model, t + 0.5 * h, tmp, k3);
        for (std::size_t a = 0; a < k; ++a) tmp[a] = p[a] + h * k3[a];
        forward_rhs(model, t + h, tmp, k4);

        double total = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            double v = p[a] + h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
            v = std::max(v, 0.0);
            tmp[a] = v;
            total += v;
        }
        for (std::size_t a = 0; a < k; ++a) {
            probs[(i + 1) * k + a] = tmp[a] / total;
        }
    }
    return MarginalLaw(grid, k, x0, std::move(probs));
}

// ---------------------------------------------------------------------------
// Path integrals
// ---------------------------------------------------------------------------

std::vector<double> path_tail_integrals(const Trajectory& traj, const PathIntegrand& integrand,
                                        const TimeGrid& breakpoints,
                                        std::span<const double> query_times) {
    const double t0 = traj.start_time();
    const double horizon = traj.horizon();
    if (breakpoints.front() > t0 + 1e-12 || breakpoints.back() < horizon - 1e-12) {
        throw std::domain_error("breakpoint grid does not cover the trajectory");
    }
    std::vector<double> cuts;
    cuts.reserve(breakpoints.size() + traj.jumps().size() + query_times.size() + 2);
    cuts.push_back(t0);
    cuts.push_back(horizon);
    for (double t : breakpoints.points()) {
        if (t > t0 && t < horizon) cuts.push_back(t);
    }
    for (const Jump& j : traj.jumps()) {
        if (j.time < horizon) cuts.push_back(j.time);
    }
    for (double s : query_times) {
        if (s < t0 || s > horizon) {
            throw std::domain_error("query time outside the trajectory range");
        }
        cuts.push_back(s);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const auto& jumps = traj.jumps();
    std::size_t next_jump = 0;
    StateIndex x = traj.start_state();
    std::vector<double> pieces(cuts.size() - 1);
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        const double a = cuts[p];
        const double b = cuts[p + 1];
        while (next_jump < jumps.size() && jumps[next_jump].time <= a) {
            x = jumps[next_jump].to;
            ++next_jump;
        }
        const double mid = 0.5 * (a + b);
        pieces[p] = (b - a) / 6.0 *
                    (integrand(a, x) + 4.0 * integrand(mid, x) + integrand(b, x));
    }
    // suffix[p] = integral over [cuts[p], T]
    std::vector<double> suffix(cuts.size(), 0.0);
    for (std::size_t p = pieces.size(); p-- > 0;) {
        suffix[p] = suffix[p + 1] + pieces[p];
    }
    std::vector<double> out;
    out.reserve(query_times.size());
    for (double s : query_times) {
        const auto it = std::lower_bound(cuts.begin(), cuts.end(), s);
        out.push_back(suffix[static_cast<std::size_t>(it - cuts.begin())]);
    }
    return out;
}

std::vector<double> compensated_tail_integrals(const MarkovModel& model, const Trajectory& traj,
                                               const ZField& z, const TimeGrid& breakpoints,
                                               std::span<const double> query_times) {
    const double slack = 1e-12 * std::max(1.0, std::abs(traj.horizon()));
    if (traj.start_time() < z.t_begin - slack || traj.horizon() > z.t_end + slack) {
        throw std::domain_error("trajectory extends beyond the z-field's time domain");
    }
    const PathIntegrand compensator = [&](double t, StateIndex x) {
        const double m = model.modulation()(t);
        double acc = 0.0;
        for (const Edge& e : model.edges(x)) {
            acc += z.fn(t, x, e.to) * m * e.rate;
        }
        return acc;
    };
    std::vector<double> out = path_tail_integrals(traj, compensator, breakpoints, query_times);
    for (std::size_t q = 0; q < query_times.size(); ++q) {
        double jump_sum = 0.0;
        for (const Jump& j : traj.jumps()) {
            if (j.time > query_times[q]) {
                jump_sum += z.fn(j.time, j.from, j.to);
            }
        }
        out[q] = jump_sum - out[q];
    }
    return out;
}

double compensated_integral(const MarkovModel& model, const Trajectory& traj, const ZField& z,
                            const TimeGrid& breakpoints) {
    const double start[] = {traj.start_time()};
    return compensated_tail_integrals(model, traj, z, breakpoints, start).front();
}

}  // namespace jumpbsde
