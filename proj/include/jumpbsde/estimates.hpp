#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jumpbsde/ball_sampling.hpp"
#include "jumpbsde/solver_local.hpp"

namespace jumpbsde {

/// A-priori bounds: E|Y_s|^2 <= C1, E int ||Z||^2 <= C2, sup |Y_s|^2 <= K1 (bounded xi).
struct AprioriConstants {
    double C1 = 0.0;
    double C2 = 0.0;
    std::optional<double> K1;
    double lambda = 0.0;
    double T = 0.0;
    double E_xi_sq = 0.0;
    std::optional<double> sup_xi_sq;
};

/// C1 = (E + 9T) exp((1 + 3 lambda^2) T), C2 = 2(E + 9T) + 2T(1 + 4 lambda^2) C1,
/// K1 = (sup + 9T) exp((9T + lambda^2 + 2 lambda) T).
AprioriConstants apriori_constants(double lambda, double T, double E_xi_sq,
                                   std::optional<double> sup_xi_sq = std::nullopt);

/// E|h(X_T)|^2 under the law's last row.
double terminal_second_moment(const MarginalLaw& law, const TerminalCondition& h);

/// Constants for a solved problem on the law's horizon, bounded case included.
AprioriConstants apriori_for(const MarginalLaw& law, const Driver& driver,
                             const TerminalCondition& h);

struct BoundCheck {
    std::string bound_name;
    std::map<std::string, double> formula_inputs;
    double bound_value = 0.0;
    double measured_value = 0.0;
    bool pass = false;
};

struct AprioriReport {
    std::vector<BoundCheck> checks;
    bool pass = false;
};

AprioriReport check_apriori(const MarkovModel& model, const MarginalLaw& law, const ValueField& u,
                            const AprioriConstants& constants);

/// (E int sup_{|y|, ||z|| <= M} |f1 - f2|^2 (s, X_s, y, z) ds)^{1/2}; the sup runs over the
/// nested Halton sets of `ball_samples` points per integer radius up to M, the time
/// integral is the trapezoid rule on the law's grid.
double phi_seminorm(const MarkovModel& model, const MarginalLaw& law, const Driver& f1,
                    const Driver& f2, double M, std::size_t ball_samples = 1000);

/// Computable envelope for the stability constant from C1/C2 (maximised over both problems):
/// 6 lambda^2 [2T + 2 (C1 T)^a ((C1+C2)(T+1))^{1-a} + 2 C2^{a/2} ((C1+C2)(T+1))^{1-a/2}].
double lemma2_constant(double lambda, double alpha, double T, double C1, double C2);

struct Lemma2Inputs {
    double C = 0.0;
    double E_xi_diff_sq = 0.0;
    double phi1 = 0.0;
    double phi2 = 0.0;
    double L_M = 0.0;
    double M = 2.0;
    double alpha = 0.5;
    double T = 1.0;
    double s = 0.0;
};

struct Lemma2Bound {
    double y_bound;
    double C;
    double E_xi_diff_sq;
    /// v = (E int |Ybar|^2 dr)^{1/2} -> C [E|xi_bar|^2 + v].
    double z_bound(double v) const { return C * (E_xi_diff_sq + v); }
};

/// Throws std::domain_error for M <= 1 or negative inputs.
Lemma2Bound lemma2_bound(const Lemma2Inputs& in);

/// Bound on the squared B-distance over [t0, T]: int y_bound(s) ds + z_bound(sqrt(that)),
/// with the time integral on the law's grid.
double lemma2_b_bound(Lemma2Inputs in, const TimeGrid& grid);

struct Perturbation {
    double index;
    Driver driver;
    TerminalCondition h;
};

/// f + scale/n, h + scale/n.
std::vector<Perturbation> additive_perturbations(const Driver& driver, const TerminalCondition& h,
                                                 const std::vector<double>& indices,
                                                 double scale = 1.0);

struct StabilityRun {
    double index;
    double sq_b_distance;
    double predicted_bound;
    double phi;           ///< Phi_M(f_n - f) at the chosen M
    double E_xi_diff_sq;
    double M;
    double lemma2_C;
    bool dominated;
};

struct StabilityReport {
    std::vector<StabilityRun> runs;
    bool monotone = false;             ///< nonincreasing distances
    bool strictly_decreasing = false;
    bool final_below_tol = false;
    bool dominated = false;
    bool pass = false;
};

struct StabilityOptions {
    double tol = 1e-3;
    LocalSolveOptions local;
    std::vector<double> radii{2, 4, 8, 16, 32, 64};
    /// Radii M > 1 over which the stability bound is minimised (it holds for each).
    std::vector<double> bound_radii{2, 4, 8, 16, 32, 64};
    std::size_t ball_samples = 1000;
    unsigned threads = 1;
};

/// Solves the base problem and each perturbed problem with solve_local and compares
/// squared B-distances with the stability envelope. Inner failures are rethrown with
/// the run index attached.
StabilityReport stability_experiment(const MarkovModel& model, const Driver& driver,
                                     const TerminalCondition& h, const MarginalLaw& law,
                                     const std::vector<Perturbation>& perturbations,
                                     const StabilityOptions& options = {});

}  // namespace jumpbsde
