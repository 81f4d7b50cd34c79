#include "jumpbsde/ball_sampling.hpp"

#include <cmath>
#include <stdexcept>

namespace jumpbsde {

namespace {

constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
constexpr double kInside = 1.0 - 1e-12;

}  // namespace

double radical_inverse(std::uint64_t index, unsigned base) {
    double result = 0.0;
    double scale = 1.0 / base;
    while (index > 0) {
        result += static_cast<double>(index % base) * scale;
        index /= base;
        scale /= base;
    }
    return result;
}

UnitBallSet::UnitBallSet(std::size_t count, std::size_t states)
    : count_(count), states_(states), y_frac_(count), r_frac_(count), dir_(count * states) {
    if (states + 2 > std::size(kPrimes)) {
        throw std::domain_error("too many states for the Halton ball sampler");
    }
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint64_t idx = i + 1;
        y_frac_[i] = (2.0 * radical_inverse(idx, kPrimes[0]) - 1.0) * kInside;
        r_frac_[i] = radical_inverse(idx, kPrimes[1]) * kInside;
        for (std::size_t k = 0; k < states; ++k) {
            dir_[i * states + k] = 2.0 * radical_inverse(idx, kPrimes[2 + k]) - 1.0;
        }
    }
}

double UnitBallSet::materialize(const MarkovModel& model, double t, StateIndex x, double radius,
                                std::size_t i, std::span<double> z_out,
                                double& z_norm_out) const {
    for (std::size_t k = 0; k < states_; ++k) z_out[k] = dir_[i * states_ + k];
    z_out[x] = 0.0;
    const double raw = z_norm(model, t, x, z_out);
    if (raw > 0.0) {
        const double scale = r_frac_[i] * radius / raw;
        for (double& v : z_out) v *= scale;
        z_norm_out = z_norm(model, t, x, z_out);
    } else {
        for (double& v : z_out) v = 0.0;
        z_norm_out = 0.0;
    }
    return y_frac_[i] * radius;
}

std::vector<double> nested_radii(double radius) {
    if (!(radius >= 1.0) || !std::isfinite(radius)) {
        throw std::domain_error("ball radius must be at least 1");
    }
    std::vector<double> radii;
    const double whole = std::floor(radius);
    for (double m = 1.0; m <= whole; m += 1.0) radii.push_back(m);
    if (radius > whole) radii.push_back(radius);
    return radii;
}

}  // namespace jumpbsde
