#pragma once

#include <cmath>
#include <sstream>
#include <vector>

#include "zrp/errors.hpp"
#include "zrp/model.hpp"

namespace zrp {

/// Site-dependent fugacity of the invariant product measure. The profile is
/// affine in x and must stay below the radius of convergence phi_star at
/// every site.
struct FugacityProfile {
    int N = 0;
    double theta = 1.0;
    double alpha = 0.0, beta = 0.0, lambda = 0.0, delta = 1.0;
    std::vector<double> values;  // site x at values[x-1]

    double operator()(int x) const { return values[static_cast<std::size_t>(x - 1)]; }
};

/// Fugacity profile of the invariant measure for the general boundary model,
///   phi(x) = [-(alpha delta - beta lambda)(x-1) + alpha delta (N-2)
///             + (alpha+beta) N^theta] / [lambda delta (N-2) + (lambda+delta) N^theta].
/// For delta = 1, lambda = beta = 0 this reduces algebraically to
///   phi(x) = -alpha (x+1)/N^theta + alpha/N^{theta-1} + alpha.
inline FugacityProfile fugacity_profile(const ModelParams& p) {
    const int N = p.N();
    const double Nth = std::pow(static_cast<double>(N), p.theta());
    const double denom = p.lambda() * p.delta() * (N - 2) + (p.lambda() + p.delta()) * Nth;
    if (denom <= 0.0)
        throw ConfigError("fugacity profile undefined: no annihilation channel (lambda = delta = 0)");
    const double slope_num = p.alpha() * p.delta() - p.beta() * p.lambda();

    FugacityProfile prof;
    prof.N = N;
    prof.theta = p.theta();
    prof.alpha = p.alpha();
    prof.beta = p.beta();
    prof.lambda = p.lambda();
    prof.delta = p.delta();
    prof.values.resize(static_cast<std::size_t>(N - 1));
    const double phi_star = p.g().phi_star();
    for (int x = 1; x <= N - 1; ++x) {
        double phi = (-slope_num * (x - 1) + p.alpha() * p.delta() * (N - 2) +
                      (p.alpha() + p.beta()) * Nth) /
                     denom;
        if (phi < 0.0) phi = 0.0;  // alpha = beta = 0 gives the zero profile exactly
        if (phi >= phi_star) {
            std::ostringstream os;
            os << "fugacity " << phi << " at site " << x << " reaches phi_star = " << phi_star;
            throw FugacityExceedsRadius(os.str());
        }
        prof.values[static_cast<std::size_t>(x - 1)] = phi;
    }
    return prof;
}

/// Specialized closed form of the profile (delta = 1, lambda = beta = 0):
/// phi(x) = -alpha(x+1)/N^theta + alpha/N^{theta-1} + alpha.
inline double specialized_fugacity(int N, double theta, double alpha, int x) {
    const double Nth = std::pow(static_cast<double>(N), theta);
    return -alpha * (x + 1) / Nth + alpha / std::pow(static_cast<double>(N), theta - 1.0) + alpha;
}

} // namespace zrp
