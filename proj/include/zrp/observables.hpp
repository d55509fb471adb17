#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "zrp/configuration.hpp"
#include "zrp/errors.hpp"
#include "zrp/grand_canonical.hpp"
#include "zrp/model.hpp"
#include "zrp/product_measure.hpp"
#include "zrp/simulator.hpp"
#include "zrp/test_function.hpp"

namespace zrp {

/// <pi^N(eta), G> = (1/N) sum_x G(x/N) eta(x).
inline double empirical_pairing(const Configuration& eta, const TestFunction& G) {
    const int N = eta.n_sites() + 1;
    double s = 0.0;
    for (int x = 1; x <= N - 1; ++x)
        s += G(static_cast<double>(x) / N) * static_cast<double>(eta.at(x));
    return s / N;
}

/// Generator applied to f at eta by direct enumeration of every event:
/// sum_ev rate(ev) [f(eta^ev) - f(eta)].
inline double generator_apply(const Configuration& eta, const ModelParams& p,
                              const std::function<double(const Configuration&)>& f) {
    double s = 0.0;
    double f0 = f(eta);
    for (const Event& ev : all_events(p.N())) {
        double r = event_rate(eta, ev, p);
        if (r <= 0.0) continue;
        s += r * (f(apply_event(eta, ev, p.N())) - f0);
    }
    return s;
}

/// Per-site coefficients of the drift N^2 L_N <pi^N, G> as a function of the
/// g-values: drift = sum_x W[x] g(eta(x)) + C. Bulk sites carry the discrete
/// Laplacian, the edge sites the gradient and reservoir terms.
struct DriftCoefficients {
    std::vector<double> W;  // site x at [x-1]
    double C = 0.0;

    DriftCoefficients(const TestFunction& G, const ModelParams& p) {
        const int N = p.N();
        const double scale = p.diffusive() ? 1.0 : 1.0 / (static_cast<double>(N) * N);
        const double res = std::pow(static_cast<double>(N), 1.0 - p.theta());
        W.assign(static_cast<std::size_t>(N - 1), 0.0);
        for (int x = 2; x <= N - 2; ++x)
            W[static_cast<std::size_t>(x - 1)] = laplacian_N(G, N, x) / N;
        W[0] += grad_plus_N(G, N, 1) - p.lambda() * res * G(1.0 / N);
        W[static_cast<std::size_t>(N - 2)] +=
            -grad_minus_N(G, N, N - 1) - p.delta() * res * G((N - 1.0) / N);
        C = res * (p.alpha() * G(1.0 / N) + p.beta() * G((N - 1.0) / N));
        if (scale != 1.0) {
            for (auto& w : W) w *= scale;
            C *= scale;
        }
    }
};

/// N^2 L_N <pi^N, G> evaluated as the exact finite sum (without the N^2 when
/// params is non-diffusive, matching the generator as parameterized).
inline double dynkin_drift(const Configuration& eta, const TestFunction& G,
                           const ModelParams& p) {
    DriftCoefficients dc(G, p);
    double s = dc.C;
    for (int x = 1; x <= p.N() - 1; ++x)
        s += dc.W[static_cast<std::size_t>(x - 1)] * p.g()(eta.at(x));
    return s;
}

/// Per-site coefficients of the quadratic-variation integrand B^N:
/// B^N = sum_x V[x] g(eta(x)) + C.
struct QvCoefficients {
    std::vector<double> V;
    double C = 0.0;

    QvCoefficients(const TestFunction& G, const ModelParams& p) {
        const int N = p.N();
        const double scale = p.diffusive() ? 1.0 : 1.0 / (static_cast<double>(N) * N);
        const double damp = p.boundary_damp();
        V.assign(static_cast<std::size_t>(N - 1), 0.0);
        auto Gx = [&](int x) { return G(static_cast<double>(x) / N); };
        for (int x = 1; x <= N - 1; ++x) {
            double v = 0.0;
            if (x > 1) v += (Gx(x - 1) - Gx(x)) * (Gx(x - 1) - Gx(x));
            if (x < N - 1) v += (Gx(x + 1) - Gx(x)) * (Gx(x + 1) - Gx(x));
            V[static_cast<std::size_t>(x - 1)] = v;
        }
        V[0] += p.lambda() * damp * Gx(1) * Gx(1);
        V[static_cast<std::size_t>(N - 2)] += p.delta() * damp * Gx(N - 1) * Gx(N - 1);
        C = damp * (p.alpha() * Gx(1) * Gx(1) + p.beta() * Gx(N - 1) * Gx(N - 1));
        if (scale != 1.0) {
            for (auto& v : V) v *= scale;
            C *= scale;
        }
    }
};

/// B^N(eta) of the quadratic variation <M^G>_t = int_0^t B^N(s) ds.
inline double qv_integrand(const Configuration& eta, const TestFunction& G, const ModelParams& p) {
    QvCoefficients qc(G, p);
    double s = qc.C;
    for (int x = 1; x <= p.N() - 1; ++x)
        s += qc.V[static_cast<std::size_t>(x - 1)] * p.g()(eta.at(x));
    return s;
}

struct MartingaleRecord {
    double t = 0.0;
    double M = 0.0;            // M_t^G
    double QV_integral = 0.0;  // int_0^t B^N(s) ds
};

/// Observer accumulating the Dynkin martingale M_t^G and its quadratic
/// variation along a run. Drift and B^N are piecewise constant between
/// events, so the time integrals are exact. Records are taken at the given
/// schedule; pairing/drift/QV state is refreshed from scratch at each record
/// to kill float drift.
class MartingaleTracker : public NullObserver {
public:
    MartingaleTracker(const TestFunction& G, const ModelParams& p, std::vector<double> schedule)
        : p_(p), dc_(G, p), qc_(G, p), times_(std::move(schedule)) {
        const int N = p_.N();
        cpair_.resize(static_cast<std::size_t>(N - 1));
        for (int x = 1; x <= N - 1; ++x)
            cpair_[static_cast<std::size_t>(x - 1)] = G(static_cast<double>(x) / N) / N;
        records_.reserve(times_.size());
    }

    void segment(double t0, double t1, const Configuration& eta) {
        if (!started_) start(eta);
        bool flushed = false;
        while (next_ < times_.size() && times_[next_] < t1) {
            if (!flushed) {
                refresh(eta);
                flushed = true;
            }
            double s = times_[next_];
            records_.push_back({s, pairing_ - pairing0_ - (int_drift_ + drift_ * (s - t0)),
                                int_qv_ + qv_ * (s - t0)});
            ++next_;
        }
        int_drift_ += drift_ * (t1 - t0);
        int_qv_ += qv_ * (t1 - t0);
    }

    void event(double, const Event&, const SiteChange* ch, int nch, const Configuration&) {
        for (int i = 0; i < nch; ++i) {
            const auto& c = ch[i];
            double dg = p_.g()(c.after) - p_.g()(c.before);
            double dn = static_cast<double>(c.after) - static_cast<double>(c.before);
            pairing_ += cpair_[static_cast<std::size_t>(c.site - 1)] * dn;
            drift_ += dc_.W[static_cast<std::size_t>(c.site - 1)] * dg;
            qv_ += qc_.V[static_cast<std::size_t>(c.site - 1)] * dg;
        }
    }

    void finalize(double T, const Configuration& eta) {
        if (!started_) start(eta);
        refresh(eta);
        while (next_ < times_.size() && times_[next_] <= T) {
            records_.push_back({times_[next_], pairing_ - pairing0_ - int_drift_, int_qv_});
            ++next_;
        }
    }

    const std::vector<MartingaleRecord>& records() const { return records_; }

private:
    void start(const Configuration& eta) {
        refresh(eta);
        pairing0_ = pairing_;
        started_ = true;
    }

    void refresh(const Configuration& eta) {
        pairing_ = 0.0;
        drift_ = dc_.C;
        qv_ = qc_.C;
        for (int x = 1; x <= p_.N() - 1; ++x) {
            double g = p_.g()(eta.at(x));
            pairing_ += cpair_[static_cast<std::size_t>(x - 1)] * eta.at(x);
            drift_ += dc_.W[static_cast<std::size_t>(x - 1)] * g;
            qv_ += qc_.V[static_cast<std::size_t>(x - 1)] * g;
        }
    }

    ModelParams p_;
    DriftCoefficients dc_;
    QvCoefficients qc_;
    std::vector<double> cpair_;
    std::vector<double> times_;
    std::size_t next_ = 0;
    bool started_ = false;
    double pairing_ = 0.0, pairing0_ = 0.0, drift_ = 0.0, qv_ = 0.0;
    double int_drift_ = 0.0, int_qv_ = 0.0;
    std::vector<MartingaleRecord> records_;
};

/// Martingale statistics along a dense trajectory.
inline std::vector<MartingaleRecord> martingale_track(const DenseTrajectory& traj,
                                                      const TestFunction& G,
                                                      const ModelParams& p,
                                                      std::vector<double> schedule) {
    MartingaleTracker mt(G, p, std::move(schedule));
    traj.replay(mt);
    return mt.records();
}

/// Snapshot trajectories do not carry the events between snapshots.
inline std::vector<MartingaleRecord> martingale_track(const Trajectory&, const TestFunction&,
                                                      const ModelParams&, std::vector<double>) {
    throw DenseTrajectoryRequired("martingale tracking needs a dense (per-event) trajectory");
}

enum class BlockDirection { Forward, Backward };

inline int eps_window(double eps, int N) { return static_cast<int>(std::floor(eps * N)); }

/// Block average of the occupancies: forward over y in (x, x+epsN], backward
/// over y in [x-epsN, x-1].
inline double block_average(const Configuration& eta, int x, int epsN,
                            BlockDirection dir = BlockDirection::Forward) {
    const int n = eta.n_sites();
    if (epsN < 1) throw WindowOutOfRange("window must contain at least one site");
    int lo = (dir == BlockDirection::Forward) ? x + 1 : x - epsN;
    int hi = (dir == BlockDirection::Forward) ? x + epsN : x - 1;
    if (lo < 1 || hi > n) throw WindowOutOfRange("block window leaves the lattice");
    double s = 0.0;
    for (int y = lo; y <= hi; ++y) s += eta.at(y);
    return s / epsN;
}

/// Same window, averaging g(eta(y)).
inline double g_block_average(const Configuration& eta, const RateFunction& g, int x, int epsN,
                              BlockDirection dir = BlockDirection::Forward) {
    const int n = eta.n_sites();
    if (epsN < 1) throw WindowOutOfRange("window must contain at least one site");
    int lo = (dir == BlockDirection::Forward) ? x + 1 : x - epsN;
    int hi = (dir == BlockDirection::Forward) ? x + epsN : x - 1;
    if (lo < 1 || hi > n) throw WindowOutOfRange("block window leaves the lattice");
    double s = 0.0;
    for (int y = lo; y <= hi; ++y) s += g(eta.at(y));
    return s / epsN;
}

struct ReplacementResiduals {
    double r4 = 0.0;
    double rb_left = 0.0;
    double rb_right = 0.0;
};

/// Observer accumulating the replacement-lemma residuals along a run:
///   R4     = int (1/N) sum_{x in I_N^eps} Lap G(x/N)
///                 [ g-block-average(x) - Phi(block-average(x)) ] ds
///   R^b    = int f_i(s) [ g-window - Phi(window density) ] ds at each edge,
/// forward window at x = 1, backward window at x = N-1. Window sums are
/// maintained incrementally (an event touches at most 2 eps-N windows' worth
/// of terms); Phi is cached on the lattice of reachable block densities
/// m / epsN.
class ReplacementTracker : public NullObserver {
public:
    ReplacementTracker(const ModelParams& p, const GrandCanonical& gc, const TestFunction& G,
                       double eps, std::function<double(double)> f1 = nullptr,
                       std::function<double(double)> f2 = nullptr)
        : p_(p), gc_(gc), f1_(std::move(f1)), f2_(std::move(f2)) {
        const int N = p_.N();
        epsN_ = eps_window(eps, N);
        if (epsN_ < 1) throw WindowOutOfRange("eps N < 1");
        if (1 + epsN_ > N - 1 || N - 1 - epsN_ < 1)
            throw WindowOutOfRange("boundary windows leave the lattice");
        xlo_ = 1 + epsN_;
        xhi_ = N - 1 - epsN_;
        lapG_.assign(static_cast<std::size_t>(N), 0.0);
        for (int x = xlo_; x <= xhi_; ++x)
            lapG_[static_cast<std::size_t>(x)] = G.d2(static_cast<double>(x) / N);
        sn_.assign(static_cast<std::size_t>(N), 0);
        sg_.assign(static_cast<std::size_t>(N), 0.0);
        term_.assign(static_cast<std::size_t>(N), 0.0);
    }

    void segment(double t0, double t1, const Configuration& eta) {
        if (!started_) start(eta);
        double dt = t1 - t0;
        r4_ += (a_total_ / p_.N()) * dt;
        double left = sg_left_ / epsN_ - phi_of(sn_left_);
        double right = sg_right_ / epsN_ - phi_of(sn_right_);
        rb_left_ += weight_integral(f1_, t0, t1) * left;
        rb_right_ += weight_integral(f2_, t0, t1) * right;
    }

    void event(double, const Event&, const SiteChange* ch, int nch, const Configuration& eta) {
        for (int i = 0; i < nch; ++i) {
            const auto& c = ch[i];
            int dn = static_cast<int>(c.after) - static_cast<int>(c.before);
            double dg = p_.g()(c.after) - p_.g()(c.before);
            int y = c.site;
            int lo = std::max(xlo_, y - epsN_);
            int hi = std::min(xhi_, y - 1);
            for (int x = lo; x <= hi; ++x) {
                a_total_ -= term_[static_cast<std::size_t>(x)];
                sn_[static_cast<std::size_t>(x)] += dn;
                sg_[static_cast<std::size_t>(x)] += dg;
                term_[static_cast<std::size_t>(x)] = compute_term(x);
                a_total_ += term_[static_cast<std::size_t>(x)];
            }
            if (y >= 2 && y <= 1 + epsN_) {
                sn_left_ += dn;
                sg_left_ += dg;
            }
            if (y >= p_.N() - 1 - epsN_ && y <= p_.N() - 2) {
                sn_right_ += dn;
                sg_right_ += dg;
            }
        }
        if (++updates_ % 65536 == 0) refresh_from(eta);
    }

    void finalize(double, const Configuration&) {}

    ReplacementResiduals residuals() const { return {r4_, rb_left_, rb_right_}; }

private:
    void start(const Configuration& eta) {
        refresh_from(eta);
        started_ = true;
    }

    void refresh_from(const Configuration& eta) {
        a_total_ = 0.0;
        for (int x = xlo_; x <= xhi_; ++x) {
            long sn = 0;
            double sg = 0.0;
            for (int y = x + 1; y <= x + epsN_; ++y) {
                sn += eta.at(y);
                sg += p_.g()(eta.at(y));
            }
            sn_[static_cast<std::size_t>(x)] = sn;
            sg_[static_cast<std::size_t>(x)] = sg;
            term_[static_cast<std::size_t>(x)] = compute_term(x);
            a_total_ += term_[static_cast<std::size_t>(x)];
        }
        sn_left_ = 0;
        sg_left_ = 0.0;
        for (int y = 2; y <= 1 + epsN_; ++y) {
            sn_left_ += eta.at(y);
            sg_left_ += p_.g()(eta.at(y));
        }
        sn_right_ = 0;
        sg_right_ = 0.0;
        for (int y = p_.N() - 1 - epsN_; y <= p_.N() - 2; ++y) {
            sn_right_ += eta.at(y);
            sg_right_ += p_.g()(eta.at(y));
        }
    }

    double compute_term(int x) {
        return lapG_[static_cast<std::size_t>(x)] *
               (sg_[static_cast<std::size_t>(x)] / epsN_ - phi_of(sn_[static_cast<std::size_t>(x)]));
    }

    double phi_of(long m) {
        if (m < 0) throw Error("negative window occupancy");
        auto idx = static_cast<std::size_t>(m);
        if (idx >= phi_cache_.size())
            phi_cache_.resize(idx + 1, std::numeric_limits<double>::quiet_NaN());
        if (std::isnan(phi_cache_[idx]))
            phi_cache_[idx] = gc_.phi_inverse(static_cast<double>(m) / epsN_);
        return phi_cache_[idx];
    }

    /// int_{t0}^{t1} f(s) ds; Simpson is plenty over one event gap.
    static double weight_integral(const std::function<double(double)>& f, double t0, double t1) {
        if (!f) return t1 - t0;
        double mid = 0.5 * (t0 + t1);
        return (t1 - t0) / 6.0 * (f(t0) + 4.0 * f(mid) + f(t1));
    }

    ModelParams p_;
    const GrandCanonical& gc_;
    std::function<double(double)> f1_, f2_;
    int epsN_ = 0, xlo_ = 0, xhi_ = -1;
    std::vector<double> lapG_;
    std::vector<long> sn_;
    std::vector<double> sg_, term_;
    std::vector<double> phi_cache_;
    double a_total_ = 0.0;
    long sn_left_ = 0, sn_right_ = 0;
    double sg_left_ = 0.0, sg_right_ = 0.0;
    double r4_ = 0.0, rb_left_ = 0.0, rb_right_ = 0.0;
    bool started_ = false;
    std::uint64_t updates_ = 0;
};

/// Residuals of the replacement lemmas along a dense trajectory, with user
/// time weights f1, f2 (defaulting to 1).
inline ReplacementResiduals replacement_residuals(const DenseTrajectory& traj,
                                                  const ModelParams& p, const GrandCanonical& gc,
                                                  const TestFunction& G, double eps,
                                                  std::function<double(double)> f1 = nullptr,
                                                  std::function<double(double)> f2 = nullptr) {
    ReplacementTracker rt(p, gc, G, eps, std::move(f1), std::move(f2));
    traj.replay(rt);
    return rt.residuals();
}

/// Fraction of draws with |<pi^N, H> - int H rho0| > delta. The integral is
/// computed by adaptive Gauss-Kronrod quadrature to 1e-10.
inline double profile_association_statistic(const ProductMeasureSampler& sampler,
                                            const std::function<double(double)>& rho0,
                                            const TestFunction& H, double delta, int draws,
                                            CounterRng& rng) {
    double target = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        [&](double u) { return H(u) * rho0(u); }, 0.0, 1.0, 15, 1e-10);
    int exceed = 0;
    for (int i = 0; i < draws; ++i) {
        Configuration eta = sampler.sample(rng);
        if (std::abs(empirical_pairing(eta, H) - target) > delta) ++exceed;
    }
    return static_cast<double>(exceed) / draws;
}

} // namespace zrp
