#pragma once

#include <map>
#include <string>
#include <vector>

#include "jumpbsde/bsde_core.hpp"

namespace jumpbsde::drivers {

/// f = 0.
Driver zero();

/// f = c.
Driver constant(double c);

/// f = a y + b ||z|| + c. Globally Lipschitz with L = max(|a|, |b|); linear growth
/// (alpha = 1) with lambda = max(|a|, |b|, |c|).
Driver linear(double a, double c, double b = 0.0);

/// f = lambda0 sin(y sqrt(ln(e + |y|))). Locally Lipschitz with
/// L_M = lambda0 (sqrt(ln(e + M)) + 1/2) <= L + sqrt(ln M) for lambda0 <= 1, L >= 2.
Driver osc_sqrtlog(double lambda0 = 1.0, double alpha = 0.5, double base_L = 2.0);

/// g = -r y, pure discounting.
Driver finance_discount(double r);

/// f + shift, same profile; growth constant raised by |shift|.
Driver shifted(const Driver& driver, double shift);

/// Registry lookup by name: zero, const, linear, osc_sqrtlog, finance_discount.
/// Throws std::invalid_argument for unknown names or parameters.
Driver make(const std::string& name, const std::map<std::string, double>& params);

std::vector<std::string> registry_names();

}  // namespace jumpbsde::drivers
