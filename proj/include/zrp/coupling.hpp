#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>

#include "zrp/configuration.hpp"
#include "zrp/errors.hpp"
#include "zrp/model.hpp"
#include "zrp/rate_index.hpp"
#include "zrp/rng.hpp"

namespace zrp {

/// Basic coupling of two copies of the process with ordered initial data
/// (lower <= upper), sharing one clock and one random stream. At each bulk
/// site the copies jump together at rate min(g(eta(x)), g(xi(x))) in a common
/// direction and the upper copy alone at rate g(xi(x)) - g(eta(x));
/// creations are simultaneous, annihilations are coupled the same way as the
/// jumps. Each marginal follows the original law, and for non-decreasing g
/// the componentwise order is preserved at every event. Ordering is asserted
/// at the touched sites after every event.
class CoupledSimulator {
public:
    CoupledSimulator(ModelParams params, Configuration lower, Configuration upper, CounterRng rng)
        : p_(std::move(params)), lo_(std::move(lower)), up_(std::move(upper)), rng_(rng),
          idx_(4 * (p_.N() - 1) + 6) {
        if (!p_.g().non_decreasing())
            throw ConfigError("coupling requires a non-decreasing rate function");
        if (lo_.n_sites() != p_.n_sites() || up_.n_sites() != p_.n_sites())
            throw ConfigError("configuration size does not match N");
        if (!lo_.dominated_by(up_))
            throw DominationViolated("initial configurations are not ordered");
        base_ = 4 * (p_.N() - 1);
        for (int x = 1; x <= p_.N() - 1; ++x) refresh_site(x);
        idx_.set(base_ + 0, p_.speed() * p_.alpha() * p_.boundary_damp());
        idx_.set(base_ + 1, p_.speed() * p_.beta() * p_.boundary_damp());
    }

    const Configuration& lower() const { return lo_; }
    const Configuration& upper() const { return up_; }
    double time() const { return t_; }
    std::uint64_t events() const { return events_; }
    double total_rate_cached() const { return idx_.total(); }

    /// One joint event. Throws Absorbed if nothing can move in either copy.
    double step() {
        double R = idx_.total();
        if (R <= 0.0) throw Absorbed("coupled total rate is zero");
        double dt = rng_.exponential(R);
        int s = idx_.sample(rng_.uniform() * R);
        apply_slot(s);
        t_ += dt;
        ++events_;
        if (events_ % 1000000 == 0) idx_.rebuild();
        return dt;
    }

    void run_until(double T) {
        while (t_ < T) {
            double R = idx_.total();
            if (R <= 0.0) {
                t_ = T;
                return;
            }
            double dt = rng_.exponential(R);
            if (t_ + dt >= T) {
                t_ = T;
                return;
            }
            int s = idx_.sample(rng_.uniform() * R);
            apply_slot(s);
            t_ += dt;
            ++events_;
            if (events_ % 1000000 == 0) idx_.rebuild();
        }
    }

    /// Full ordering sweep; cheap enough for tests.
    void check_order() const {
        if (!lo_.dominated_by(up_)) throw OrderingViolated("lower exceeds upper");
    }

private:
    // slots per site x: 4(x-1) + {0: joint left, 1: joint right,
    //                             2: upper-alone left, 3: upper-alone right}
    // base_ + {0: create left, 1: create right, 2: joint annihilate left,
    //          3: upper-alone annihilate left, 4: joint annihilate right,
    //          5: upper-alone annihilate right}
    void refresh_site(int x) {
        const int N = p_.N();
        const double gl = p_.g()(lo_.at(x));
        const double gu = p_.g()(up_.at(x));
        const double joint = p_.speed() * std::min(gl, gu);
        const double alone = p_.speed() * std::max(0.0, gu - gl);
        const bool can_left = x > 1, can_right = x < N - 1;
        idx_.set(4 * (x - 1) + 0, can_left ? joint : 0.0);
        idx_.set(4 * (x - 1) + 1, can_right ? joint : 0.0);
        idx_.set(4 * (x - 1) + 2, can_left ? alone : 0.0);
        idx_.set(4 * (x - 1) + 3, can_right ? alone : 0.0);
        const double damp = p_.boundary_damp();
        if (x == 1) {
            idx_.set(base_ + 2, p_.lambda() * joint * damp);
            idx_.set(base_ + 3, p_.lambda() * alone * damp);
        }
        if (x == N - 1) {
            idx_.set(base_ + 4, p_.delta() * joint * damp);
            idx_.set(base_ + 5, p_.delta() * alone * damp);
        }
    }

    void apply_slot(int s) {
        const int N = p_.N();
        if (s < base_) {
            int x = s / 4 + 1;
            int r = s % 4;
            int dir = (r % 2 == 0) ? -1 : +1;
            int y = x + dir;
            if (r < 2) {
                apply_event_inplace(lo_, Event::bulk(x, dir), N);
            }
            apply_event_inplace(up_, Event::bulk(x, dir), N);
            refresh_site(x);
            refresh_site(y);
            assert_order_at(x);
            assert_order_at(y);
            return;
        }
        switch (s - base_) {
        case 0:
            apply_event_inplace(lo_, Event::create_left(), N);
            apply_event_inplace(up_, Event::create_left(), N);
            refresh_site(1);
            assert_order_at(1);
            break;
        case 1:
            apply_event_inplace(lo_, Event::create_right(), N);
            apply_event_inplace(up_, Event::create_right(), N);
            refresh_site(N - 1);
            assert_order_at(N - 1);
            break;
        case 2:
            apply_event_inplace(lo_, Event::annihilate_left(), N);
            apply_event_inplace(up_, Event::annihilate_left(), N);
            refresh_site(1);
            assert_order_at(1);
            break;
        case 3:
            apply_event_inplace(up_, Event::annihilate_left(), N);
            refresh_site(1);
            assert_order_at(1);
            break;
        case 4:
            apply_event_inplace(lo_, Event::annihilate_right(), N);
            apply_event_inplace(up_, Event::annihilate_right(), N);
            refresh_site(N - 1);
            assert_order_at(N - 1);
            break;
        case 5:
            apply_event_inplace(up_, Event::annihilate_right(), N);
            refresh_site(N - 1);
            assert_order_at(N - 1);
            break;
        }
    }

    void assert_order_at(int x) const {
        if (lo_.at(x) > up_.at(x))
            throw OrderingViolated("order violated at site " + std::to_string(x));
    }

    ModelParams p_;
    Configuration lo_, up_;
    CounterRng rng_;
    RateIndex idx_;
    int base_;
    double t_ = 0.0;
    std::uint64_t events_ = 0;
};

} // namespace zrp
