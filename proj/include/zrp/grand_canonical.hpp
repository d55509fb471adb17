#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>

#include "zrp/errors.hpp"
#include "zrp/rate_function.hpp"

namespace zrp {

/// Grand-canonical machinery of the zero-range marginal with fugacity phi:
/// partition function Z(phi) = sum_k phi^k / g(k)!, particle density
/// R(phi) = Z^{-1} sum_k k phi^k / g(k)!, higher moments, the marginal pmf,
/// and the inverse map Phi = R^{-1}.
///
/// Series are truncated adaptively: summation stops once the current term is
/// below series_tol times the partial sum and the ratio test certifies a
/// geometric tail, whose bound is then added. All evaluators are pure const
/// functions; concurrent use is safe.
class GrandCanonical {
public:
    explicit GrandCanonical(RateFunction g, double series_tol = 1e-14, int max_terms = 100000)
        : g_(std::move(g)), series_tol_(series_tol), max_terms_(max_terms) {
        if (!(series_tol_ > 0)) throw ConfigError("series_tol must be positive");
        if (max_terms_ <= 0) throw ConfigError("max_terms must be positive");
    }

    const RateFunction& g() const { return g_; }
    double phi_star() const { return g_.phi_star(); }
    double series_tol() const { return series_tol_; }

    /// Z(phi) >= 1.
    double partition(double phi) const { return weighted_series(phi, 0); }

    /// R(phi); strictly increasing in phi.
    double density(double phi) const { return weighted_series(phi, 1) / weighted_series(phi, 0); }

    /// R_ell(phi) = Z^{-1} sum_k k^ell phi^k / g(k)!, 1 <= ell <= 4.
    double moment(double phi, int ell) const {
        if (ell < 1 || ell > 4) throw ConfigError("moment order must be in 1..4");
        return weighted_series(phi, ell) / weighted_series(phi, 0);
    }

    /// Marginal probability of k particles at fugacity phi.
    double pmf(double phi, std::uint64_t k) const {
        check_fugacity(phi);
        if (phi == 0.0) return k == 0 ? 1.0 : 0.0;
        double t = 1.0;
        for (std::uint64_t j = 1; j <= k; ++j) {
            double gj = g_(j);
            if (gj <= 0.0) return 0.0;  // g(j)! infinite past a dead rate
            t *= phi / gj;
        }
        return t / partition(phi);
    }

    /// Phi(rho): the unique phi in [0, phi_star) with R(phi) = rho, by
    /// bisection to absolute tolerance 1e-12. Phi(0) = 0 exactly.
    double phi_inverse(double rho) const {
        if (rho < 0) throw DensityUnreachable("negative density");
        if (rho == 0.0) return 0.0;
        double hi;
        if (std::isfinite(phi_star())) {
            hi = phi_star() * (1.0 - 1e-9);
            if (density(hi) < rho) {
                std::ostringstream os;
                os << "R cannot reach density " << rho << " below phi_star = " << phi_star();
                throw DensityUnreachable(os.str());
            }
        } else {
            hi = 1.0;
            int guard = 0;
            while (density(hi) < rho) {
                hi *= 2.0;
                if (++guard > 200) throw DensityUnreachable("bracketing failed");
            }
        }
        double lo = 0.0;
        while (hi - lo > 1e-12) {
            double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            (density(mid) < rho ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

private:
    void check_fugacity(double phi) const {
        if (phi < 0 || phi >= phi_star() || !std::isfinite(phi)) {
            std::ostringstream os;
            os << "fugacity " << phi << " outside [0, " << phi_star() << ")";
            throw FugacityOutOfRange(os.str());
        }
    }

    /// Exact sum_{m>=1} (k+m)^ell q^m via the geometric moment sums
    /// S_j = sum_m m^j q^m (Eulerian-number closed forms).
    static double geometric_weighted_tail(double q, double k, int ell) {
        const double r = 1.0 - q;
        double S[5];
        S[0] = q / r;
        S[1] = q / (r * r);
        S[2] = q * (1.0 + q) / (r * r * r);
        S[3] = q * (1.0 + 4.0 * q + q * q) / (r * r * r * r);
        S[4] = q * (1.0 + q * (11.0 + q * (11.0 + q))) / (r * r * r * r * r);
        static const double binom[5][5] = {{1, 0, 0, 0, 0},
                                           {1, 1, 0, 0, 0},
                                           {1, 2, 1, 0, 0},
                                           {1, 3, 3, 1, 0},
                                           {1, 4, 6, 4, 1}};
        double acc = 0.0;
        double kpow = 1.0;  // k^{ell-j} built from the top
        for (int j = ell; j >= 0; --j) {
            acc += binom[ell][j] * kpow * S[j];
            kpow *= k;
        }
        return acc;
    }

    /// sum_k k^ell phi^k / g(k)! with certified geometric tail. When g is
    /// constant beyond k the tail is summed exactly in closed form, which
    /// keeps fugacities arbitrarily close to a finite phi_star affordable.
    double weighted_series(double phi, int ell) const {
        check_fugacity(phi);
        double sum = (ell == 0) ? 1.0 : 0.0;  // k = 0 term
        if (phi == 0.0) return sum;
        double t = 1.0;  // phi^k / g(k)!
        for (int k = 1; k <= max_terms_; ++k) {
            double gk = g_(static_cast<std::uint64_t>(k));
            if (gk <= 0.0)
                throw ZeroRateInFactorial("partition series hit g(k) = 0 at positive fugacity");
            t *= phi / gk;
            double w = t;
            for (int i = 0; i < ell; ++i) w *= static_cast<double>(k);
            sum += w;
            if (g_.constant_beyond(static_cast<std::uint64_t>(k))) {
                double q = phi / g_(static_cast<std::uint64_t>(k) + 1);
                if (q >= 1.0) throw FugacityOutOfRange("geometric tail diverges");
                sum += t * geometric_weighted_tail(q, static_cast<double>(k), ell);
                return sum;
            }
            // sup over the tail of the term ratio w_{j+1}/w_j
            double q = phi / g_.tail_inf(static_cast<std::uint64_t>(k));
            if (ell > 0) {
                double growth = (static_cast<double>(k) + 1.0) / static_cast<double>(k);
                for (int i = 0; i < ell; ++i) q *= growth;
            }
            if (q < 1.0 && w < series_tol_ * sum) {
                sum += w * q / (1.0 - q);
                return sum;
            }
        }
        throw SeriesNotConverged("series did not certify a tail within max_terms");
    }

    RateFunction g_;
    double series_tol_;
    int max_terms_;
};

} // namespace zrp
