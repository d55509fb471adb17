#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "zrp/errors.hpp"
#include "zrp/grand_canonical.hpp"
#include "zrp/test_function.hpp"

namespace zrp {

/// Cell averages of the macroscopic density on a uniform grid of [0,1].
struct DensityField {
    std::vector<double> rho;
    double t = 0.0;

    int M() const { return static_cast<int>(rho.size()); }
    double h() const { return 1.0 / static_cast<double>(rho.size()); }
    double cell_center(int i) const { return (i + 0.5) * h(); }  // i = 0..M-1

    double mass() const {
        double s = 0.0;
        for (double v : rho) s += v;
        return s * h();
    }

    /// Initial data gamma sampled at cell midpoints.
    static DensityField from_profile(int M, const std::function<double(double)>& gamma) {
        DensityField f;
        f.rho.resize(static_cast<std::size_t>(M));
        for (int i = 0; i < M; ++i) f.rho[static_cast<std::size_t>(i)] = gamma((i + 0.5) / M);
        return f;
    }
};

/// kappa = 1 gives the Robin boundary laws (theta = 1), kappa = 0 the
/// zero-flux Neumann laws (theta > 1). The boundary rates enter only when
/// kappa = 1.
struct BoundarySpec {
    int kappa = 1;
    double alpha = 0.0, beta = 0.0, lambda = 0.0, delta = 1.0;
};

/// Density-to-fugacity map Phi = R^{-1} used as the PDE nonlinearity. Either
/// exact (bisection per call), tabulated on a uniform density grid with
/// nodes from the exact map (fast path for time stepping), or the identity.
class PhiMap {
public:
    static PhiMap identity() {
        PhiMap m;
        m.mode_ = Mode::Identity;
        return m;
    }

    static PhiMap exact(const GrandCanonical& gc) {
        PhiMap m;
        m.mode_ = Mode::Exact;
        m.gc_ = &gc;
        return m;
    }

    /// Lazy uniform table with spacing drho; node values from phi_inverse.
    static PhiMap tabulated(const GrandCanonical& gc, double drho = 1.0 / 4096.0) {
        PhiMap m;
        m.mode_ = Mode::Table;
        m.gc_ = &gc;
        m.drho_ = drho;
        m.nodes_.push_back(0.0);  // Phi(0) = 0
        return m;
    }

    double operator()(double rho) const {
        switch (mode_) {
        case Mode::Identity: return rho;
        case Mode::Exact: return gc_->phi_inverse(rho);
        case Mode::Table: {
            double pos = rho / drho_;
            auto i = static_cast<std::size_t>(pos);
            ensure(i + 1);
            double w = pos - static_cast<double>(i);
            return (1.0 - w) * nodes_[i] + w * nodes_[i + 1];
        }
        }
        return rho;
    }

    /// Centered-difference slope at rho, floored away from zero for CFL use.
    double slope(double rho, double floor_value = 1e-12) const {
        double d = std::max(1e-7, 1e-7 * rho);
        double lo = std::max(0.0, rho - d);
        double s = ((*this)(rho + d) - (*this)(lo)) / (rho + d - lo);
        return std::max(s, floor_value);
    }

private:
    enum class Mode { Identity, Exact, Table };

    void ensure(std::size_t i) const {
        while (nodes_.size() <= i)
            nodes_.push_back(gc_->phi_inverse(static_cast<double>(nodes_.size()) * drho_));
    }

    Mode mode_ = Mode::Identity;
    const GrandCanonical* gc_ = nullptr;
    double drho_ = 1.0 / 4096.0;
    mutable std::vector<double> nodes_;
};

/// Boundary fluxes of the conservation form, reading the flux as
/// J = -d_u Phi(rho): F_left = kappa (alpha - lambda Phi(rho_1)),
/// F_right = -kappa (beta - delta Phi(rho_M)), with the boundary-adjacent
/// cell values standing in for the trace (first-order extrapolation).
/// kappa = 0 is zero-flux.
inline std::pair<double, double> boundary_fluxes(const DensityField& f, const BoundarySpec& bc,
                                                 const PhiMap& phi) {
    if (bc.kappa == 0) return {0.0, 0.0};
    double F_left = bc.alpha - bc.lambda * phi(f.rho.front());
    double F_right = -(bc.beta - bc.delta * phi(f.rho.back()));
    return {F_left, F_right};
}

/// Conservative right-hand side d rho_i / dt = (F_{i-1/2} - F_{i+1/2}) / h
/// with interior fluxes F_{i+1/2} = -(Phi(rho_{i+1}) - Phi(rho_i)) / h.
inline std::vector<double> rhs(const DensityField& f, const BoundarySpec& bc, const PhiMap& phi) {
    const int M = f.M();
    const double h = f.h();
    std::vector<double> phiv(static_cast<std::size_t>(M));
    for (int i = 0; i < M; ++i) phiv[static_cast<std::size_t>(i)] = phi(f.rho[static_cast<std::size_t>(i)]);
    auto [F_left, F_right] = boundary_fluxes(f, bc, phi);
    std::vector<double> out(static_cast<std::size_t>(M));
    double F_prev = F_left;
    for (int i = 0; i < M; ++i) {
        double F_next = (i + 1 < M)
                            ? -(phiv[static_cast<std::size_t>(i + 1)] - phiv[static_cast<std::size_t>(i)]) / h
                            : F_right;
        out[static_cast<std::size_t>(i)] = (F_prev - F_next) / h;
        F_prev = F_next;
    }
    return out;
}

/// Largest stable step: cfl * h^2 / (2 sup_i Phi'(rho_i)).
inline double cfl_dt(const DensityField& f, const PhiMap& phi, double cfl = 0.9) {
    double L = 1e-12;
    for (double r : f.rho) L = std::max(L, phi.slope(r));
    return cfl * f.h() * f.h() / (2.0 * L);
}

/// One forward-Euler step. Throws StabilityFailure on negative or non-finite
/// output; callers that can retry should halve dt (see solve).
inline DensityField step_explicit(const DensityField& f, const BoundarySpec& bc,
                                  const PhiMap& phi, double dt) {
    std::vector<double> d = rhs(f, bc, phi);
    DensityField out = f;
    for (int i = 0; i < f.M(); ++i) {
        double v = f.rho[static_cast<std::size_t>(i)] + dt * d[static_cast<std::size_t>(i)];
        if (!std::isfinite(v) || v < 0.0)
            throw StabilityFailure("negative or non-finite density in cell " + std::to_string(i));
        out.rho[static_cast<std::size_t>(i)] = v;
    }
    out.t = f.t + dt;
    return out;
}

struct SolveControls {
    double cfl = 0.9;
    std::vector<double> output_times;  // strictly increasing, within (0, T]
    int max_retries = 20;
};

struct PdeSolution {
    std::vector<double> times;
    std::vector<DensityField> fields;
};

/// March to time T with adaptive steps capped by the CFL bound, landing
/// exactly on every requested output time. The solution record always ends
/// with the state at T.
inline PdeSolution solve(DensityField f, const BoundarySpec& bc, const PhiMap& phi, double T,
                         const SolveControls& ctl = {}) {
    PdeSolution sol;
    std::size_t next_out = 0;
    auto flush = [&](const DensityField& cur) {
        while (next_out < ctl.output_times.size() && ctl.output_times[next_out] <= cur.t + 1e-15) {
            sol.times.push_back(ctl.output_times[next_out]);
            sol.fields.push_back(cur);
            sol.fields.back().t = ctl.output_times[next_out];
            ++next_out;
        }
    };
    flush(f);
    while (f.t < T) {
        double dt = std::min(cfl_dt(f, phi, ctl.cfl), T - f.t);
        if (next_out < ctl.output_times.size())
            dt = std::min(dt, ctl.output_times[next_out] - f.t);
        int tries = 0;
        for (;;) {
            try {
                f = step_explicit(f, bc, phi, dt);
                break;
            } catch (const StabilityFailure&) {
                if (++tries > ctl.max_retries) throw;
                dt *= 0.5;
            }
        }
        flush(f);
    }
    if (sol.times.empty() || sol.times.back() < T) {
        sol.times.push_back(T);
        sol.fields.push_back(f);
    }
    return sol;
}

inline DensityField solve_final(DensityField f, const BoundarySpec& bc, const PhiMap& phi,
                                double T, const SolveControls& ctl = {}) {
    return solve(std::move(f), bc, phi, T, ctl).fields.back();
}

/// Defect of the weak formulation at time t over a recorded solution:
///   <rho_t, G_t> - <rho_0, G_0>
///   - int_0^t { <rho_s, d_s G_s> + <Phi(rho_s), Lap G_s>
///               + Phi(rho_s(0)) d_u G_s(0) - Phi(rho_s(1)) d_u G_s(1)
///               + kappa [ (alpha - lambda Phi(rho_s(0))) G_s(0)
///                         + (beta - delta Phi(rho_s(1))) G_s(1) ] } ds
/// with cell-midpoint quadrature in space and trapezoidal quadrature in time
/// over the recorded output grid. Goes to 0 as h, dt -> 0.
inline double weak_form_residual(const PdeSolution& sol, const BoundarySpec& bc,
                                 const PhiMap& phi, const SpaceTimeFunction& G, double t) {
    if (sol.times.size() < 2) throw ConfigError("weak form needs at least two recorded times");
    auto pairing = [&](const DensityField& f, double s,
                       const std::function<double(double, double)>& w) {
        double acc = 0.0;
        for (int i = 0; i < f.M(); ++i)
            acc += f.rho[static_cast<std::size_t>(i)] * w(s, f.cell_center(i));
        return acc * f.h();
    };
    auto integrand = [&](const DensityField& f, double s) {
        double acc = pairing(f, s, G.ds);
        for (int i = 0; i < f.M(); ++i)
            acc += phi(f.rho[static_cast<std::size_t>(i)]) * G.duu(s, f.cell_center(i)) * f.h();
        double phi0 = phi(f.rho.front());
        double phi1 = phi(f.rho.back());
        acc += phi0 * G.du(s, 0.0) - phi1 * G.du(s, 1.0);
        if (bc.kappa == 1)
            acc += (bc.alpha - bc.lambda * phi0) * G.f(s, 0.0) +
                   (bc.beta - bc.delta * phi1) * G.f(s, 1.0);
        return acc;
    };

    double time_integral = 0.0;
    std::size_t last = 0;
    for (std::size_t k = 0; k + 1 < sol.times.size() && sol.times[k + 1] <= t + 1e-12; ++k) {
        double dt = sol.times[k + 1] - sol.times[k];
        time_integral += 0.5 * dt * (integrand(sol.fields[k], sol.times[k]) +
                                     integrand(sol.fields[k + 1], sol.times[k + 1]));
        last = k + 1;
    }
    return pairing(sol.fields[last], sol.times[last], G.f) -
           pairing(sol.fields.front(), sol.times.front(), G.f) - time_integral;
}

} // namespace zrp
