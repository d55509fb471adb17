#pragma once

#include <cmath>
#include <cstdint>

#include "zrp/configuration.hpp"
#include "zrp/errors.hpp"
#include "zrp/rate_function.hpp"

namespace zrp {

/// Model parameters of the boundary driven zero-range process on {1..N-1}.
/// Particles are created at site 1 with rate alpha/N^theta and at site N-1
/// with rate beta/N^theta, and removed at site 1 with rate
/// lambda g(eta(1))/N^theta and at site N-1 with rate delta g(eta(N-1))/N^theta.
/// The paper's specialized model is delta = 1, lambda = beta = 0.
/// With diffusive = true all rates carry the N^2 speed-up, so simulation time
/// is macroscopic.
class ModelParams {
public:
    ModelParams(int N, double theta, double alpha, RateFunction g, bool diffusive = true,
                double beta = 0.0, double lambda = 0.0, double delta = 1.0)
        : N_(N), theta_(theta), alpha_(alpha), beta_(beta), lambda_(lambda), delta_(delta),
          g_(std::move(g)), diffusive_(diffusive) {
        if (N_ < 3) throw ConfigError("N must be >= 3");
        if (!(theta_ >= 1.0)) throw ConfigError("theta must be >= 1");
        if (alpha_ < 0 || beta_ < 0 || lambda_ < 0 || delta_ < 0)
            throw ConfigError("boundary rates must be >= 0");
        speed_ = diffusive_ ? static_cast<double>(N_) * static_cast<double>(N_) : 1.0;
        boundary_damp_ = std::pow(static_cast<double>(N_), -theta_);
    }

    int N() const { return N_; }
    int n_sites() const { return N_ - 1; }
    double theta() const { return theta_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    double lambda() const { return lambda_; }
    double delta() const { return delta_; }
    const RateFunction& g() const { return g_; }
    bool diffusive() const { return diffusive_; }

    /// N^2 when diffusive, else 1.
    double speed() const { return speed_; }

    /// N^{-theta}.
    double boundary_damp() const { return boundary_damp_; }

    bool specialized() const { return delta_ == 1.0 && lambda_ == 0.0 && beta_ == 0.0; }

    ModelParams with_diffusive(bool d) const {
        return ModelParams(N_, theta_, alpha_, g_, d, beta_, lambda_, delta_);
    }

private:
    int N_;
    double theta_, alpha_, beta_, lambda_, delta_;
    RateFunction g_;
    bool diffusive_;
    double speed_, boundary_damp_;
};

enum class EventKind : std::uint8_t {
    BulkJump,
    CreateLeft,
    CreateRight,
    AnnihilateLeft,
    AnnihilateRight,
};

/// One transition of the process. BulkJump moves a particle from site x to
/// x + dir; the other kinds act at the fixed boundary sites.
struct Event {
    EventKind kind = EventKind::BulkJump;
    int x = 0;
    int dir = 0;

    static Event bulk(int x, int dir) { return {EventKind::BulkJump, x, dir}; }
    static Event create_left() { return {EventKind::CreateLeft, 0, 0}; }
    static Event create_right() { return {EventKind::CreateRight, 0, 0}; }
    static Event annihilate_left() { return {EventKind::AnnihilateLeft, 0, 0}; }
    static Event annihilate_right() { return {EventKind::AnnihilateRight, 0, 0}; }
};

namespace detail {
inline void check_bulk_geometry(const Event& ev, int N) {
    if (ev.dir != 1 && ev.dir != -1) throw ImpossibleEvent("bulk jump direction must be +-1");
    int y = ev.x + ev.dir;
    if (ev.x < 1 || ev.x > N - 1 || y < 1 || y > N - 1)
        throw ImpossibleEvent("bulk jump leaves the lattice");
}
} // namespace detail

/// Rate of an event in configuration eta; carries the N^2 speed-up when
/// params is diffusive. Empty-site departures come out as 0 via g(0) = 0.
inline double event_rate(const Configuration& eta, const Event& ev, const ModelParams& p) {
    const double s = p.speed();
    switch (ev.kind) {
    case EventKind::BulkJump:
        detail::check_bulk_geometry(ev, p.N());
        return s * p.g()(eta.at(ev.x));
    case EventKind::CreateLeft:
        return s * p.alpha() * p.boundary_damp();
    case EventKind::CreateRight:
        return s * p.beta() * p.boundary_damp();
    case EventKind::AnnihilateLeft:
        return s * p.lambda() * p.g()(eta.at(1)) * p.boundary_damp();
    case EventKind::AnnihilateRight:
        return s * p.delta() * p.g()(eta.at(p.N() - 1)) * p.boundary_damp();
    }
    return 0.0;
}

/// In-place transition. Throws ImpossibleEvent when the event has rate zero
/// by construction (departure or annihilation at an empty site).
inline void apply_event_inplace(Configuration& eta, const Event& ev, int N) {
    switch (ev.kind) {
    case EventKind::BulkJump:
        detail::check_bulk_geometry(ev, N);
        eta.remove_at(ev.x);
        eta.add_at(ev.x + ev.dir);
        break;
    case EventKind::CreateLeft:
        eta.add_at(1);
        break;
    case EventKind::CreateRight:
        eta.add_at(N - 1);
        break;
    case EventKind::AnnihilateLeft:
        eta.remove_at(1);
        break;
    case EventKind::AnnihilateRight:
        eta.remove_at(N - 1);
        break;
    }
}

inline Configuration apply_event(const Configuration& eta, const Event& ev, int N) {
    Configuration out = eta;
    apply_event_inplace(out, ev, N);
    return out;
}

/// Total exit rate lambda(eta): the sum of every event rate. Non-diffusive
/// specialized form is g(eta(1)) + 2 sum_{x=2..N-2} g(eta(x)) + g(eta(N-1))
/// + alpha/N^theta + g(eta(N-1))/N^theta.
inline double total_rate(const Configuration& eta, const ModelParams& p) {
    const int N = p.N();
    double bulk = p.g()(eta.at(1)) + p.g()(eta.at(N - 1));
    for (int x = 2; x <= N - 2; ++x) bulk += 2.0 * p.g()(eta.at(x));
    double boundary = (p.alpha() + p.beta() + p.lambda() * p.g()(eta.at(1)) +
                       p.delta() * p.g()(eta.at(N - 1))) *
                      p.boundary_damp();
    return p.speed() * (bulk + boundary);
}

/// Enumerate every event with positive possible rate for lattice size N.
inline std::vector<Event> all_events(int N) {
    std::vector<Event> evs;
    evs.reserve(2 * (N - 1) + 4);
    for (int x = 1; x <= N - 1; ++x) {
        if (x - 1 >= 1) evs.push_back(Event::bulk(x, -1));
        if (x + 1 <= N - 1) evs.push_back(Event::bulk(x, +1));
    }
    evs.push_back(Event::create_left());
    evs.push_back(Event::create_right());
    evs.push_back(Event::annihilate_left());
    evs.push_back(Event::annihilate_right());
    return evs;
}

} // namespace zrp
