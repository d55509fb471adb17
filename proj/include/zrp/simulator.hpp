#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "zrp/configuration.hpp"
#include "zrp/errors.hpp"
#include "zrp/model.hpp"
#include "zrp/rate_index.hpp"
#include "zrp/rng.hpp"

namespace zrp {

/// One site whose occupancy an event changed.
struct SiteChange {
    int site;
    std::uint32_t before;
    std::uint32_t after;
};

/// Observer concept for run_until:
///   segment(t0, t1, eta)            eta held on [t0, t1); an event fires at t1
///   event(t, ev, changes, n, eta)   after the event is applied
///   finalize(T, eta)                once, when the clock reaches the horizon
struct NullObserver {
    void segment(double, double, const Configuration&) {}
    void event(double, const Event&, const SiteChange*, int, const Configuration&) {}
    void finalize(double, const Configuration&) {}
};

/// Exact continuous-time simulation of the process. The clock is macroscopic
/// when params.diffusive (rates carry the N^2 speed-up). Event slots live in
/// a Fenwick tree: per site a left-jump and right-jump slot, plus four
/// boundary slots; an event touches at most two sites, so updates cost
/// O(log N).
class Simulator {
public:
    Simulator(ModelParams params, Configuration init, CounterRng rng)
        : p_(std::move(params)), eta_(std::move(init)), rng_(rng),
          idx_(2 * (p_.N() - 1) + 4) {
        if (eta_.n_sites() != p_.n_sites())
            throw ConfigError("configuration size does not match N");
        const int N = p_.N();
        base_ = 2 * (N - 1);
        for (int x = 1; x <= N - 1; ++x) refresh_site(x);
        idx_.set(base_ + 0, p_.speed() * p_.alpha() * p_.boundary_damp());
        idx_.set(base_ + 1, p_.speed() * p_.beta() * p_.boundary_damp());
    }

    const ModelParams& params() const { return p_; }
    const Configuration& config() const { return eta_; }
    double time() const { return t_; }
    std::uint64_t creations() const { return creations_; }
    std::uint64_t annihilations() const { return annihilations_; }
    std::uint64_t events() const { return events_; }
    double total_rate_cached() const { return idx_.total(); }
    const RateIndex& rate_index() const { return idx_; }
    CounterRng& rng() { return rng_; }

    /// One exact step: exponential waiting time at the total rate, event
    /// chosen with probability proportional to its rate. Throws Absorbed when
    /// no event is possible.
    std::pair<Event, double> step() {
        NullObserver nop;
        return step_core(nop);
    }

    /// Advance to macroscopic time T, driving the observer. Returns early
    /// (with the clock at T) if the process absorbs.
    template <class Obs>
    void run_until(double T, Obs&& obs) {
        while (t_ < T) {
            double R = idx_.total();
            if (R <= 0.0) break;
            double dt = rng_.exponential(R);
            double t_next = t_ + dt;
            if (t_next >= T) {
                obs.segment(t_, T, eta_);
                t_ = T;
                obs.finalize(T, eta_);
                return;
            }
            obs.segment(t_, t_next, eta_);
            apply_next(t_next, obs);
        }
        if (t_ < T) {
            obs.segment(t_, T, eta_);
            t_ = T;
        }
        obs.finalize(T, eta_);
    }

private:
    template <class Obs>
    std::pair<Event, double> step_core(Obs& obs) {
        double R = idx_.total();
        if (R <= 0.0) throw Absorbed("total rate is zero");
        double dt = rng_.exponential(R);
        double t_next = t_ + dt;
        Event ev = apply_next(t_next, obs);
        return {ev, dt};
    }

    template <class Obs>
    Event apply_next(double t_next, Obs& obs) {
        double R = idx_.total();
        double u = rng_.uniform() * R;
        Event ev = decode_slot(idx_.sample(u));

        SiteChange ch[2];
        int nch = 0;
        const int N = p_.N();
        switch (ev.kind) {
        case EventKind::BulkJump: {
            int y = ev.x + ev.dir;
            ch[0] = {ev.x, eta_.at(ev.x), eta_.at(ev.x) - 1};
            ch[1] = {y, eta_.at(y), eta_.at(y) + 1};
            nch = 2;
            break;
        }
        case EventKind::CreateLeft:
            ch[0] = {1, eta_.at(1), eta_.at(1) + 1};
            nch = 1;
            ++creations_;
            break;
        case EventKind::CreateRight:
            ch[0] = {N - 1, eta_.at(N - 1), eta_.at(N - 1) + 1};
            nch = 1;
            ++creations_;
            break;
        case EventKind::AnnihilateLeft:
            ch[0] = {1, eta_.at(1), eta_.at(1) - 1};
            nch = 1;
            ++annihilations_;
            break;
        case EventKind::AnnihilateRight:
            ch[0] = {N - 1, eta_.at(N - 1), eta_.at(N - 1) - 1};
            nch = 1;
            ++annihilations_;
            break;
        }
        apply_event_inplace(eta_, ev, N);
        for (int i = 0; i < nch; ++i) refresh_site(ch[i].site);

        t_ = t_next;
        ++events_;
        if (events_ % rebuild_every_ == 0) last_rebuild_drift_ = idx_.rebuild();
        obs.event(t_, ev, ch, nch, eta_);
        return ev;
    }

    Event decode_slot(int s) const {
        if (s < base_) return Event::bulk(s / 2 + 1, (s & 1) ? +1 : -1);
        switch (s - base_) {
        case 0: return Event::create_left();
        case 1: return Event::create_right();
        case 2: return Event::annihilate_left();
        default: return Event::annihilate_right();
        }
    }

    void refresh_site(int x) {
        const int N = p_.N();
        const double gs = p_.speed() * p_.g()(eta_.at(x));
        idx_.set(2 * (x - 1), x > 1 ? gs : 0.0);
        idx_.set(2 * (x - 1) + 1, x < N - 1 ? gs : 0.0);
        if (x == 1) idx_.set(base_ + 2, p_.lambda() * gs * p_.boundary_damp());
        if (x == N - 1) idx_.set(base_ + 3, p_.delta() * gs * p_.boundary_damp());
    }

public:
    double last_rebuild_drift() const { return last_rebuild_drift_; }

private:
    ModelParams p_;
    Configuration eta_;
    CounterRng rng_;
    RateIndex idx_;
    int base_;
    double t_ = 0.0;
    std::uint64_t creations_ = 0, annihilations_ = 0, events_ = 0;
    std::uint64_t rebuild_every_ = 1000000;
    double last_rebuild_drift_ = 0.0;
};

/// Snapshots of a run on a fixed schedule, cadlag convention: the snapshot at
/// time s is the state after the last event <= s.
struct Trajectory {
    std::vector<double> times;
    std::vector<Configuration> snapshots;
};

class SnapshotRecorder : public NullObserver {
public:
    explicit SnapshotRecorder(std::vector<double> schedule) { traj_.times = std::move(schedule); }

    void segment(double /*t0*/, double t1, const Configuration& eta) {
        while (next_ < traj_.times.size() && traj_.times[next_] < t1) {
            traj_.snapshots.push_back(eta);
            ++next_;
        }
    }

    void finalize(double T, const Configuration& eta) {
        while (next_ < traj_.times.size() && traj_.times[next_] <= T) {
            traj_.snapshots.push_back(eta);
            ++next_;
        }
    }

    Trajectory take() { return std::move(traj_); }

private:
    Trajectory traj_;
    std::size_t next_ = 0;
};

/// Every event of a run, replayable through any observer.
struct DenseTrajectory {
    Configuration initial;
    std::vector<std::pair<double, Event>> events;
    double horizon = 0.0;
    int N = 0;

    /// Replay through obs (same hooks as run_until).
    template <class Obs>
    void replay(Obs&& obs) const {
        Configuration eta = initial;
        double t = 0.0;
        for (const auto& [te, ev] : events) {
            obs.segment(t, te, eta);
            SiteChange ch[2];
            int nch = 0;
            switch (ev.kind) {
            case EventKind::BulkJump:
                ch[0] = {ev.x, eta.at(ev.x), eta.at(ev.x) - 1};
                ch[1] = {ev.x + ev.dir, eta.at(ev.x + ev.dir), eta.at(ev.x + ev.dir) + 1};
                nch = 2;
                break;
            case EventKind::CreateLeft:
                ch[0] = {1, eta.at(1), eta.at(1) + 1};
                nch = 1;
                break;
            case EventKind::CreateRight:
                ch[0] = {N - 1, eta.at(N - 1), eta.at(N - 1) + 1};
                nch = 1;
                break;
            case EventKind::AnnihilateLeft:
                ch[0] = {1, eta.at(1), eta.at(1) - 1};
                nch = 1;
                break;
            case EventKind::AnnihilateRight:
                ch[0] = {N - 1, eta.at(N - 1), eta.at(N - 1) - 1};
                nch = 1;
                break;
            }
            apply_event_inplace(eta, ev, N);
            obs.event(te, ev, ch, nch, eta);
            t = te;
        }
        obs.segment(t, horizon, eta);
        obs.finalize(horizon, eta);
    }
};

class DenseRecorder : public NullObserver {
public:
    DenseRecorder(const Configuration& initial, int N) {
        traj_.initial = initial;
        traj_.N = N;
    }
    void event(double t, const Event& ev, const SiteChange*, int, const Configuration&) {
        traj_.events.emplace_back(t, ev);
    }
    void finalize(double T, const Configuration&) { traj_.horizon = T; }
    DenseTrajectory take() { return std::move(traj_); }

private:
    DenseTrajectory traj_;
};

/// Run with a snapshot schedule (macroscopic times, nondecreasing).
inline Trajectory run(const ModelParams& p, Configuration init, double T,
                      std::vector<double> schedule, CounterRng rng) {
    Simulator sim(p, std::move(init), rng);
    SnapshotRecorder rec(std::move(schedule));
    sim.run_until(T, rec);
    return rec.take();
}

/// Run recording every event.
inline DenseTrajectory run_dense(const ModelParams& p, Configuration init, double T,
                                 CounterRng rng) {
    Simulator sim(p, std::move(init), rng);
    DenseRecorder rec(sim.config(), p.N());
    sim.run_until(T, rec);
    return rec.take();
}

} // namespace zrp
