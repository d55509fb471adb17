#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <unordered_map>
#include <vector>

#include "zrp/configuration.hpp"
#include "zrp/errors.hpp"
#include "zrp/fugacity_profile.hpp"
#include "zrp/grand_canonical.hpp"
#include "zrp/model.hpp"
#include "zrp/rng.hpp"

namespace zrp {

/// Inverse-CDF sampler for one grand-canonical marginal at fixed fugacity.
class MarginalSampler {
public:
    MarginalSampler(const GrandCanonical& gc, double phi) {
        const double Z = gc.partition(phi);
        double t = 1.0;  // phi^k / g(k)!
        double cum = t / Z;
        cdf_.push_back(cum);
        for (std::uint64_t k = 1; cum < 1.0 - 1e-15; ++k) {
            if (k > 1000000) throw SeriesNotConverged("marginal cdf did not close");
            double gk = gc.g()(k);
            if (gk <= 0.0) break;  // no mass beyond a dead rate
            t *= phi / gk;
            cum += t / Z;
            cdf_.push_back(cum);
        }
    }

    std::uint32_t draw(CounterRng& rng) const {
        double u = rng.uniform();
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        if (it == cdf_.end()) return static_cast<std::uint32_t>(cdf_.size() - 1);
        return static_cast<std::uint32_t>(it - cdf_.begin());
    }

    std::size_t support_size() const { return cdf_.size(); }

private:
    std::vector<double> cdf_;
};

/// Product measure over the lattice with per-site fugacities. CDF tables are
/// cached per distinct fugacity, so affine profiles cost O(N) tables and a
/// constant profile costs one.
class ProductMeasureSampler {
public:
    ProductMeasureSampler(const GrandCanonical& gc, std::vector<double> site_fugacity)
        : fugacities_(std::move(site_fugacity)) {
        std::unordered_map<double, std::shared_ptr<const MarginalSampler>> cache;
        samplers_.reserve(fugacities_.size());
        for (double phi : fugacities_) {
            auto it = cache.find(phi);
            if (it == cache.end())
                it = cache.emplace(phi, std::make_shared<const MarginalSampler>(gc, phi)).first;
            samplers_.push_back(it->second);
        }
    }

    /// Stationary measure nu_bar^N of the model.
    static ProductMeasureSampler stationary(const GrandCanonical& gc, const ModelParams& p) {
        return ProductMeasureSampler(gc, fugacity_profile(p).values);
    }

    /// Slowly varying product measure nu^N_{rho0(.)}: site x gets fugacity
    /// Phi(rho0(x/N)).
    static ProductMeasureSampler slowly_varying(const GrandCanonical& gc, int N,
                                                const std::function<double(double)>& rho0) {
        std::vector<double> phis(static_cast<std::size_t>(N - 1));
        for (int x = 1; x <= N - 1; ++x)
            phis[static_cast<std::size_t>(x - 1)] =
                gc.phi_inverse(rho0(static_cast<double>(x) / N));
        return ProductMeasureSampler(gc, phis);
    }

    Configuration sample(CounterRng& rng) const {
        Configuration c(static_cast<int>(samplers_.size()));
        for (int x = 1; x <= static_cast<int>(samplers_.size()); ++x) {
            std::uint32_t k = samplers_[static_cast<std::size_t>(x - 1)]->draw(rng);
            for (std::uint32_t i = 0; i < k; ++i) c.add_at(x);
        }
        return c;
    }

    const std::vector<double>& fugacities() const { return fugacities_; }

private:
    std::vector<double> fugacities_;
    std::vector<std::shared_ptr<const MarginalSampler>> samplers_;
};

inline Configuration sample_product_measure(const GrandCanonical& gc,
                                            const std::vector<double>& site_fugacity,
                                            CounterRng& rng) {
    return ProductMeasureSampler(gc, site_fugacity).sample(rng);
}

/// Signed defect of the stationary balance identity: the rate of probability
/// flow into eta under the product measure with the given fugacity profile,
/// in units of nu(eta), minus the total exit rate lambda(eta). Zero (to
/// roundoff) exactly for the invariant profile.
inline double stationary_balance_residual(const Configuration& eta, const ModelParams& p,
                                          const std::vector<double>& phi) {
    const int N = p.N();
    const auto& g = p.g();
    const double damp = p.boundary_damp();
    auto ph = [&](int x) { return phi[static_cast<std::size_t>(x - 1)]; };

    double inflow = 0.0;
    for (int x = 2; x <= N - 2; ++x)
        inflow += (ph(x + 1) + ph(x - 1)) / ph(x) * g(eta.at(x));
    inflow += (ph(2) + p.alpha() * damp) / ph(1) * g(eta.at(1));
    inflow += (ph(N - 2) + p.beta() * damp) / ph(N - 1) * g(eta.at(N - 1));
    inflow += (p.lambda() * ph(1) + p.delta() * ph(N - 1)) * damp;

    double outflow = total_rate(eta, p.with_diffusive(false));
    return inflow - outflow;
}

inline double stationary_balance_residual(const Configuration& eta, const ModelParams& p) {
    return stationary_balance_residual(eta, p, fugacity_profile(p).values);
}

/// Stationary density profile of the hydrostatic limit:
/// R(alpha(2-u)) for theta = 1 and the constant R(alpha) for theta > 1.
inline double hydrostatic_profile(const GrandCanonical& gc, const ModelParams& p, double u) {
    if (p.theta() == 1.0) return gc.density(p.alpha() * (2.0 - u));
    return gc.density(p.alpha());
}

} // namespace zrp
