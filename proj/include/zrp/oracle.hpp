#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "zrp/configuration.hpp"
#include "zrp/errors.hpp"
#include "zrp/grand_canonical.hpp"
#include "zrp/model.hpp"

namespace zrp {

namespace dd {

/// Double-double arithmetic (Knuth two-sum, FMA two-product, Dekker-style
/// mul/div). The truncated-chain oracle needs ~30 significant digits: the
/// product-measure residual cancels to far below one ulp of the individual
/// probability flows once the cap exceeds ~15.
struct DD {
    double hi = 0.0, lo = 0.0;
};

inline DD two_sum(double a, double b) {
    double s = a + b;
    double bp = s - a;
    return {s, (a - (s - bp)) + (b - bp)};
}

inline DD quick_renorm(double h, double l) {
    DD s = two_sum(h, l);
    return s;
}

inline DD from(double a) { return {a, 0.0}; }

inline DD add(DD a, DD b) {
    DD s = two_sum(a.hi, b.hi);
    s.lo += a.lo + b.lo;
    return quick_renorm(s.hi, s.lo);
}

inline DD neg(DD a) { return {-a.hi, -a.lo}; }

inline DD sub(DD a, DD b) { return add(a, neg(b)); }

inline DD two_prod(double a, double b) {
    double p = a * b;
    return {p, std::fma(a, b, -p)};
}

inline DD mul(DD a, DD b) {
    DD p = two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return quick_renorm(p.hi, p.lo);
}

inline DD div(DD a, DD b) {
    double q1 = a.hi / b.hi;
    DD r = sub(a, mul(from(q1), b));
    double q2 = r.hi / b.hi;
    DD rr = sub(r, mul(from(q2), b));
    double q3 = rr.hi / b.hi;
    DD q = two_sum(q1, q2);
    q.lo += q3;
    return quick_renorm(q.hi, q.lo);
}

inline double value(DD a) { return a.hi + a.lo; }

} // namespace dd

/// Finite-state oracle for the invariant measure: the process restricted to
/// occupancies 0..K per site, with any transition that would push a site
/// above K redirected to self. Solves for the stationary vector by a linear
/// solve and reports the total-variation distance to the cap-renormalized
/// Lemma-1 product measure.
///
/// The solve is formulated for the difference delta = pi_stat - pi_prod:
/// Q^T delta = -Q^T pi_prod with sum(delta) = 0. Rates, fugacities, the
/// renormalized product measure, and the residual Q^T pi_prod are all
/// carried in double-double arithmetic; only the final linear solve runs in
/// double, where its error is relative to ||delta|| itself.
class TruncatedChainOracle {
public:
    TruncatedChainOracle(const ModelParams& p, const GrandCanonical& gc, int K,
                         std::size_t max_states = 5000)
        : p_(p.with_diffusive(false)), K_(K) {
        sites_ = p_.n_sites();
        double ns = std::pow(static_cast<double>(K + 1), sites_);
        if (ns > static_cast<double>(max_states))
            throw StateSpaceTooLarge("(K+1)^{N-1} = " + std::to_string(ns) + " states");
        n_ = static_cast<std::size_t>(ns + 0.5);

        const int N = p_.N();
        const dd::DD Nth = dd_pow_int(dd::from(static_cast<double>(N)), p_.theta());
        damp_ = dd::div(dd::from(1.0), Nth);

        // general-model fugacity profile in dd
        dd::DD denom = dd::add(dd::mul(dd::from(p_.lambda() * p_.delta()), dd::from(N - 2.0)),
                               dd::mul(dd::from(p_.lambda() + p_.delta()), Nth));
        if (dd::value(denom) <= 0.0) throw ConfigError("oracle needs an annihilation channel");
        dd::DD slope = dd::from(p_.alpha() * p_.delta() - p_.beta() * p_.lambda());
        phi_.resize(static_cast<std::size_t>(sites_));
        for (int x = 1; x <= sites_; ++x) {
            dd::DD num = dd::add(
                dd::add(dd::mul(dd::neg(slope), dd::from(x - 1.0)),
                        dd::mul(dd::from(p_.alpha() * p_.delta()), dd::from(N - 2.0))),
                dd::mul(dd::from(p_.alpha() + p_.beta()), Nth));
            phi_[static_cast<std::size_t>(x - 1)] = dd::div(num, denom);
            if (dd::value(phi_[static_cast<std::size_t>(x - 1)]) >= gc.phi_star())
                throw FugacityExceedsRadius("oracle fugacity reaches phi_star at site " +
                                            std::to_string(x));
        }

        // cap-renormalized product marginals, t_k = phi^k / g(k)!
        marginals_.resize(static_cast<std::size_t>(sites_));
        tail_mass_ = 0.0;
        for (int x = 1; x <= sites_; ++x) {
            auto& m = marginals_[static_cast<std::size_t>(x - 1)];
            m.assign(static_cast<std::size_t>(K + 1), dd::from(0.0));
            dd::DD t = dd::from(1.0);
            dd::DD z = t;
            m[0] = t;
            for (int k = 1; k <= K; ++k) {
                double gk = p_.g()(static_cast<std::uint64_t>(k));
                if (gk <= 0.0) break;
                t = dd::div(dd::mul(t, phi_[static_cast<std::size_t>(x - 1)]), dd::from(gk));
                m[static_cast<std::size_t>(k)] = t;
                z = dd::add(z, t);
            }
            double full_z = gc.partition(dd::value(phi_[static_cast<std::size_t>(x - 1)]));
            tail_mass_ = std::max(tail_mass_, 1.0 - dd::value(z) / full_z);
            for (auto& v : m) v = dd::div(v, z);
        }
    }

    /// Largest per-site probability mass above the cap (before renormalizing).
    double tail_mass() const { return tail_mass_; }

    std::size_t states() const { return n_; }

    double tv_distance() const {
        if (n_ == 1) return 0.0;
        const std::size_t base = static_cast<std::size_t>(K_) + 1;
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_),
                                                  static_cast<Eigen::Index>(n_));
        std::vector<dd::DD> r(n_);

        std::vector<std::uint32_t> occ(static_cast<std::size_t>(sites_));
        std::vector<dd::DD> pi(n_);
        for (std::size_t s = 0; s < n_; ++s) {
            std::size_t rem = s;
            dd::DD v = dd::from(1.0);
            for (int x = 0; x < sites_; ++x) {
                v = dd::mul(v, marginals_[static_cast<std::size_t>(x)][rem % base]);
                rem /= base;
            }
            pi[s] = v;
        }

        for (std::size_t s = 0; s < n_; ++s) {
            std::size_t rem = s;
            for (int x = 0; x < sites_; ++x) {
                occ[static_cast<std::size_t>(x)] = static_cast<std::uint32_t>(rem % base);
                rem /= base;
            }
            for (const auto& tr : transitions_from(occ)) {
                auto [sp, q] = tr;
                if (sp == s) continue;
                A(static_cast<Eigen::Index>(sp), static_cast<Eigen::Index>(s)) += dd::value(q);
                A(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)) -= dd::value(q);
                dd::DD flow = dd::mul(q, pi[s]);
                r[sp] = dd::add(r[sp], flow);
                r[s] = dd::sub(r[s], flow);
            }
        }

        // replace one balance row by the normalization sum(delta) = 0
        Eigen::VectorXd b(static_cast<Eigen::Index>(n_));
        for (std::size_t s = 0; s < n_; ++s) b(static_cast<Eigen::Index>(s)) = -dd::value(r[s]);
        for (std::size_t s = 0; s < n_; ++s) A(0, static_cast<Eigen::Index>(s)) = 1.0;
        b(0) = 0.0;

        Eigen::VectorXd delta = A.partialPivLu().solve(b);
        double tv = 0.0;
        for (std::size_t s = 0; s < n_; ++s) tv += std::abs(delta(static_cast<Eigen::Index>(s)));
        return 0.5 * tv;
    }

private:
    static dd::DD dd_pow_int(dd::DD base, double expo) {
        // N^theta: exact repeated multiplication for integer theta, a plain
        // double power otherwise (non-integer theta has no exact form anyway)
        if (expo == std::floor(expo) && expo >= 0 && expo < 64) {
            dd::DD acc = dd::from(1.0);
            for (int i = 0; i < static_cast<int>(expo); ++i) acc = dd::mul(acc, base);
            return acc;
        }
        return dd::from(std::pow(dd::value(base), expo));
    }

    /// All capped transitions out of occ as (target state, dd rate).
    std::vector<std::pair<std::size_t, dd::DD>> transitions_from(
        const std::vector<std::uint32_t>& occ) const {
        std::vector<std::pair<std::size_t, dd::DD>> out;
        const std::size_t base = static_cast<std::size_t>(K_) + 1;
        auto encode = [&](const std::vector<std::uint32_t>& o) {
            std::size_t s = 0, mult = 1;
            for (int x = 0; x < sites_; ++x) {
                s += mult * o[static_cast<std::size_t>(x)];
                mult *= base;
            }
            return s;
        };
        auto push = [&](std::vector<std::uint32_t> o, dd::DD q) {
            out.emplace_back(encode(o), q);
        };
        auto g_at = [&](int x) { return p_.g()(occ[static_cast<std::size_t>(x - 1)]); };
        const auto cap = static_cast<std::uint32_t>(K_);

        for (int x = 1; x <= sites_; ++x) {
            if (occ[static_cast<std::size_t>(x - 1)] == 0) continue;
            for (int d : {-1, +1}) {
                int y = x + d;
                if (y < 1 || y > sites_) continue;
                if (occ[static_cast<std::size_t>(y - 1)] >= cap) continue;  // redirected
                auto o = occ;
                --o[static_cast<std::size_t>(x - 1)];
                ++o[static_cast<std::size_t>(y - 1)];
                push(std::move(o), dd::from(g_at(x)));
            }
        }
        if (p_.alpha() > 0 && occ[0] < cap) {
            auto o = occ;
            ++o[0];
            push(std::move(o), dd::mul(dd::from(p_.alpha()), damp_));
        }
        if (p_.beta() > 0 && occ[static_cast<std::size_t>(sites_ - 1)] < cap) {
            auto o = occ;
            ++o[static_cast<std::size_t>(sites_ - 1)];
            push(std::move(o), dd::mul(dd::from(p_.beta()), damp_));
        }
        if (p_.lambda() > 0 && occ[0] > 0) {
            auto o = occ;
            --o[0];
            push(std::move(o), dd::mul(dd::from(p_.lambda() * g_at(1)), damp_));
        }
        if (p_.delta() > 0 && occ[static_cast<std::size_t>(sites_ - 1)] > 0) {
            auto o = occ;
            --o[static_cast<std::size_t>(sites_ - 1)];
            push(std::move(o), dd::mul(dd::from(p_.delta() * g_at(sites_)), damp_));
        }
        return out;
    }

    ModelParams p_;
    int K_;
    int sites_ = 0;
    std::size_t n_ = 0;
    dd::DD damp_;
    std::vector<dd::DD> phi_;
    std::vector<std::vector<dd::DD>> marginals_;
    double tail_mass_ = 0.0;
};

} // namespace zrp
