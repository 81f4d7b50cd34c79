#include "jumpbsde/drivers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace jumpbsde::drivers {

namespace {

constexpr double kTinyLambda = 1e-12;

double param(const std::map<std::string, double>& params, const std::string& key,
             double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

void expect_keys(const std::string& name, const std::map<std::string, double>& params,
                 std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : params) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* a) { return key == a; });
        if (!known) {
            throw std::invalid_argument("driver '" + name + "' has no parameter '" + key + "'");
        }
        if (!std::isfinite(value)) {
            throw std::invalid_argument("driver parameter '" + key + "' is not finite");
        }
    }
}

}  // namespace

Driver zero() {
    Driver d;
    d.name = "zero";
    d.f = [](double, StateIndex, double, ZArg) { return 0.0; };
    d.lambda = 1.0;
    d.alpha = 0.5;
    d.lipschitz_profile = [](double) { return 0.0; };
    d.global_L = 0.0;
    d.lipschitz_base = 0.0;
    return d;
}

Driver constant(double c) {
    Driver d;
    d.name = "const";
    d.f = [c](double, StateIndex, double, ZArg) { return c; };
    d.lambda = std::max(std::abs(c), kTinyLambda);
    d.alpha = 0.5;
    d.lipschitz_profile = [](double) { return 0.0; };
    d.global_L = 0.0;
    d.lipschitz_base = 0.0;
    return d;
}

Driver linear(double a, double c, double b) {
    Driver d;
    d.name = "linear";
    d.f = [a, b, c](double, StateIndex, double y, ZArg z) { return a * y + b * z.norm + c; };
    const double lip = std::max(std::abs(a), std::abs(b));
    d.lambda = std::max({lip, std::abs(c), kTinyLambda});
    d.alpha = 1.0;
    d.lipschitz_profile = [lip](double) { return lip; };
    d.global_L = lip;
    d.lipschitz_base = lip;
    return d;
}

Driver osc_sqrtlog(double lambda0, double alpha, double base_L) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("osc_sqrtlog needs alpha in (0, 1)");
    }
    Driver d;
    d.name = "osc_sqrtlog";
    d.f = [lambda0](double, StateIndex, double y, ZArg) {
        return lambda0 * std::sin(y * std::sqrt(std::log(std::numbers::e + std::abs(y))));
    };
    d.lambda = std::max(std::abs(lambda0), kTinyLambda);
    d.alpha = alpha;
    // |d/dy [y sqrt(ln(e+|y|))]| <= sqrt(ln(e+|y|)) + 1/2 since ln(e+|y|) >= 1.
    d.lipschitz_profile = [lambda0](double m) {
        return std::abs(lambda0) * (std::sqrt(std::log(std::numbers::e + m)) + 0.5);
    };
    d.lipschitz_base = base_L;
    return d;
}

Driver finance_discount(double r) {
    Driver d;
    d.name = "finance_discount";
    d.f = [r](double, StateIndex, double y, ZArg) { return -r * y; };
    d.lambda = std::max(std::abs(r), kTinyLambda);
    d.alpha = 1.0;
    d.lipschitz_profile = [r](double) { return std::abs(r); };
    d.global_L = std::abs(r);
    d.lipschitz_base = std::abs(r);
    return d;
}

Driver shifted(const Driver& driver, double shift) {
    Driver d = driver;
    d.name = driver.name + "+shift";
    d.f = [inner = driver.f, shift](double t, StateIndex x, double y, ZArg z) {
        return inner(t, x, y, z) + shift;
    };
    d.lambda = driver.lambda + std::abs(shift);
    return d;
}

Driver make(const std::string& name, const std::map<std::string, double>& params) {
    if (name == "zero") {
        expect_keys(name, params, {});
        return zero();
    }
    if (name == "const") {
        expect_keys(name, params, {"c"});
        return constant(param(params, "c", 0.0));
    }
    if (name == "linear") {
        expect_keys(name, params, {"a", "b", "c"});
        return linear(param(params, "a", 0.0), param(params, "c", 0.0), param(params, "b", 0.0));
    }
    if (name == "osc_sqrtlog") {
        expect_keys(name, params, {"lambda0", "alpha", "L"});
        return osc_sqrtlog(param(params, "lambda0", 1.0), param(params, "alpha", 0.5),
                           param(params, "L", 2.0));
    }
    if (name == "finance_discount") {
        expect_keys(name, params, {"r"});
        return finance_discount(param(params, "r", 0.05));
    }
    throw std::invalid_argument("unknown driver '" + name + "'");
}

std::vector<std::string> registry_names() {
    return {"zero", "const", "linear", "osc_sqrtlog", "finance_discount"};
}

}  // namespace jumpbsde::drivers
